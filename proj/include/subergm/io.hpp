#pragma once

#include <string>

namespace subergm {

// Shortest decimal string that parses back to exactly the same double.
// Used for every numeric field we serialize so repeated runs are
// byte-identical and files stay human-readable.
std::string num_str(double x);

std::string iso8601_now();

}  // namespace subergm
