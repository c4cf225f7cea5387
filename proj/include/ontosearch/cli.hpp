#pragma once

#include <iosfwd>

namespace ontosearch {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // validation or corpus failure
inline constexpr int kExitUsage = 2;

/// Entry point for `ontosearch validate|search|serve|eval`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ontosearch
