#pragma once

namespace magpi {

enum class Status { Holds, Violated, Inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Holds: return "Holds";
    case Status::Violated: return "Violated";
    case Status::Inconclusive: return "Inconclusive";
  }
  return "?";
}

// Default cap on explored states.
inline constexpr std::size_t kDefaultStateBudget = 1'000'000;

struct StateBudget {
  std::size_t max_states = kDefaultStateBudget;
};

}  // namespace magpi
