#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace dtv::detail {

// Generated at build time from prompts/*.prompt.
const std::vector<std::pair<std::string_view, std::string_view>>& builtin_prompt_assets();

}  // namespace dtv::detail
