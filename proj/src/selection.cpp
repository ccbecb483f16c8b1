#include "grls/selection.hpp"

#include <string>
#include <string_view>

#include "grls/errors.hpp"

namespace grls {

std::string to_string(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::greedy:
      return "greedy";
    case SelectorKind::lowrank:
      return "lowrank";
    case SelectorKind::wrapper:
      return "wrapper";
    case SelectorKind::random:
      return "random";
  }
  throw DataError("unknown selector kind");
}

SelectorKind selector_from_string(std::string_view name) {
  if (name == "greedy") return SelectorKind::greedy;
  if (name == "lowrank") return SelectorKind::lowrank;
  if (name == "wrapper") return SelectorKind::wrapper;
  if (name == "random") return SelectorKind::random;
  throw DataError("unknown algorithm '" + std::string(name) +
                  "' (expected greedy, lowrank, wrapper, or random)");
}

}  // namespace grls
