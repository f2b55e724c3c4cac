#pragma once

#include <string>
#include <string_view>

namespace pman {

/// Porter (1980) suffix-stripping stemmer, original algorithm. Expects a
/// lowercase ASCII word; words of two letters or fewer are returned as is.
std::string porter_stem(std::string_view word);

}  // namespace pman
