#include "proxrl/mdp_io.hpp"

#include "proxrl/errors.hpp"

#include <json.hpp>

namespace proxrl {

using nlohmann::json;

std::string mdp_to_json(const TabularMdp& mdp) {
  const std::size_t ns = mdp.num_states();
  const std::size_t na = mdp.num_actions();
  json reward = json::array();
  json transition = json::array();
  for (std::size_t s = 0; s < ns; ++s) {
    json r_row = json::array();
    json p_state = json::array();
    for (std::size_t a = 0; a < na; ++a) {
      r_row.push_back(mdp.reward(s, a));
      json p_row = json::array();
      for (std::size_t t = 0; t < ns; ++t) p_row.push_back(mdp.probability(s, a, t));
      p_state.push_back(std::move(p_row));
    }
    reward.push_back(std::move(r_row));
    transition.push_back(std::move(p_state));
  }
  json doc;
  doc["num_states"] = ns;
  doc["num_actions"] = na;
  doc["gamma"] = mdp.gamma();
  doc["reward"] = std::move(reward);
  doc["transition"] = std::move(transition);
  return doc.dump();
}

TabularMdp mdp_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("MDP JSON does not parse: ") + e.what());
  }
  try {
    const auto ns = doc.at("num_states").get<std::size_t>();
    const auto na = doc.at("num_actions").get<std::size_t>();
    const auto gamma = doc.at("gamma").get<double>();
    const json& reward = doc.at("reward");
    const json& transition = doc.at("transition");
    if (reward.size() != ns || transition.size() != ns) {
      throw InvalidArgument("reward/transition outer length must equal num_states");
    }
    const auto n = static_cast<Eigen::Index>(ns);
    Matrix r(n, static_cast<Eigen::Index>(na));
    std::vector<Matrix> p(na, Matrix(n, n));
    for (std::size_t s = 0; s < ns; ++s) {
      if (reward[s].size() != na || transition[s].size() != na) {
        throw InvalidArgument("state " + std::to_string(s) + " does not list num_actions entries");
      }
      for (std::size_t a = 0; a < na; ++a) {
        r(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = reward[s][a].get<double>();
        const json& row = transition[s][a];
        if (row.size() != ns) {
          throw InvalidArgument("transition row (" + std::to_string(s) + "," + std::to_string(a) +
                                ") must have num_states entries");
        }
        for (std::size_t t = 0; t < ns; ++t) {
          p[a](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = row[t].get<double>();
        }
      }
    }
    return TabularMdp(std::move(p), std::move(r), gamma);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("MDP JSON has wrong shape: ") + e.what());
  }
}

}  // namespace proxrl
