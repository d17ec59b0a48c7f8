#include <fstream>

#include "cas/errors.hpp"
#include "cas/pipeline.hpp"

namespace cas {

using nlohmann::json;

std::vector<json> read_audits(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("no audit file at " + path.string());
  std::vector<json> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(json::parse(line));
  }
  return out;
}

std::vector<SweepPoint> candidate_sweep(std::span<const json> audits, std::span<const std::size_t> ns) {
  std::vector<SweepPoint> points;
  for (const std::size_t n : ns) {
    SweepPoint p;
    p.n_candidates = n;
    for (const auto& a : audits) {
      ++p.evaluated;
      if (a.contains("error") || !a.contains("choices")) continue;
      std::vector<double> best;
      for (const auto& c : a["choices"]) best.push_back(c.at("score").get<double>());
      if (a.contains("candidates")) {
        for (const auto& c : a["candidates"]) {
          if (c.at("assigned_to").is_null() || c.at("sample_index").get<std::size_t>() >= n) continue;
          const auto to = c["assigned_to"].get<std::size_t>();
          best.at(to) = std::max(best.at(to), c.at("score").get<double>());
        }
      }
      if (select_answer(best) == a.at("gold").get<std::size_t>()) ++p.correct;
    }
    p.accuracy = p.evaluated == 0 ? 0.0 : static_cast<double>(p.correct) / static_cast<double>(p.evaluated);
    points.push_back(p);
  }
  return points;
}

}  // namespace cas
