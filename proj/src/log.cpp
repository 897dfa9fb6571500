/*
   Copyright 2026 The vortlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "vortlab/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace vortlab::log {
namespace {
std::atomic<Level> g_level{Level::kWarn};
std::mutex g_mutex;
}  // namespace

void set_level(Level l) { g_level = l; }
Level level() { return g_level; }

void warn(std::string_view message) {
  if (g_level == Level::kQuiet) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "warning: " << message << '\n';
}

void info(std::string_view message) {
  if (g_level != Level::kInfo) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << message << '\n';
}

}  // namespace vortlab::log
