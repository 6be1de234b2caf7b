#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "entroheat/ocr_client.hpp"

namespace entroheat::cli {

/// Process-level dependencies of the front end. Tests substitute the
/// streams, the environment and the transport factory.
struct Services {
  std::istream* in = nullptr;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  EnvLookup env = process_environment();
  // Called only by commands that may go to the network in live mode.
  std::function<std::shared_ptr<Transport>()> make_transport;
  RetryPolicy retry;

  static Services standard();
};

/// Runs one command line (args[0] is the program name) and returns the exit
/// code: 0 ok, 2 usage, 3 I/O, 4 transport, 5 validation.
int run(const std::vector<std::string>& args, Services& services);

}  // namespace entroheat::cli
