#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace capsel {

std::string to_lower(std::string_view s);

/// Corpus normalization: lowercase, ASCII punctuation replaced by spaces,
/// collapsed whitespace. The same token stream feeds retrieval, matching
/// and metric scoring.
std::vector<std::string> tokenize(std::string_view text);

/// Tokenize and re-join with single spaces.
std::string normalize_caption(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace capsel
