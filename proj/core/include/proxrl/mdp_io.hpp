#pragma once

#include "proxrl/mdp.hpp"

#include <string>
#include <string_view>

namespace proxrl {

/// JSON document {num_states, num_actions, gamma, reward: [[...]], transition: [[[...]]]},
/// with reward[s][a] and transition[s][a][s'].
std::string mdp_to_json(const TabularMdp& mdp);

/// Inverse of mdp_to_json. Throws InvalidArgument on malformed documents or
/// on any MDP invariant violation.
TabularMdp mdp_from_json(std::string_view text);

}  // namespace proxrl
