/* Copyright 2026 The Offload Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "offload/daemon.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

using namespace offload;

int main(int argc, char** argv)
{
  CLI::App app{"Serves local devices to offload clients over TCP."};
  std::string listen;
  std::string backend_name = "host";
  std::string sim_profile, fixture;
  app.add_option("--listen", listen, "host:port to bind; port 0 picks one")->required();
  app.add_option("--backend", backend_name, "host or sim")->check(CLI::IsMember({"host", "sim"}));
  app.add_option("--sim-profile", sim_profile, "cost profile for the sim backend");
  app.add_option("--fixture", fixture, "device fixture file");
  CLI11_PARSE(app, argc, argv);

  // block termination signals before any thread exists, then wait for one
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    DaemonOptions opts;
    opts.listen = listen;
    opts.runtime.backend = parse_backend(backend_name);
    if(!sim_profile.empty())
      opts.runtime.profile = load_sim_profile(sim_profile);
    if(!fixture.empty())
      opts.runtime.devices = load_device_fixture(fixture);
    Daemon daemon(opts);
    daemon.start();
    std::cout << "listening on " << daemon.address() << std::endl;

    int sig = 0;
    sigwait(&signals, &sig);
    daemon.stop();
  } catch(const std::exception& e) {
    std::cerr << "offloadd: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
