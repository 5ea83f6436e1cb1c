#pragma once

#include <string_view>

namespace gbe {

/// Library version, suffixed with `git describe` output when built from a checkout.
std::string_view version();

}  // namespace gbe
