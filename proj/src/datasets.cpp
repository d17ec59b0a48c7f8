#include "cas/datasets.hpp"

#include <fstream>

#include <boost/tokenizer.hpp>
#include <json.hpp>

#include "cas/errors.hpp"
#include "cas/text.hpp"

namespace cas {
namespace {

using nlohmann::json;

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read dataset file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string required_text(const json& j, const char* key) {
  const std::string s = std::string(text::trim(j.at(key).get<std::string>()));
  if (s.empty()) throw DataError(std::string("field '") + key + "' is empty");
  return s;
}

std::string id_of(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key)) return std::to_string(line);
  const auto& v = j[key];
  return v.is_string() ? v.get<std::string>() : v.dump();
}

InstanceRecord parse_copa(const json& j, std::size_t line) {
  InstanceRecord r;
  r.id = id_of(j, "idx", line);
  r.dataset = DatasetTag::kCopa;
  r.context = required_text(j, "premise");
  r.question_type = j.at("question").get<std::string>();
  if (r.question_type != "cause" && r.question_type != "effect") {
    throw DataError("question must be 'cause' or 'effect', got '" + r.question_type + "'");
  }
  r.choices = {required_text(j, "choice1"), required_text(j, "choice2")};
  const int label = j.at("label").get<int>();
  if (label != 0 && label != 1) throw DataError("label must be 0 or 1");
  r.gold = static_cast<std::size_t>(label);
  return r;
}

// 1-based numeric or letter label.
std::size_t parse_label(const json& v, std::size_t n_choices) {
  std::size_t idx = 0;
  if (v.is_number_integer()) {
    idx = v.get<std::size_t>();
    if (idx == 0) throw DataError("label must be 1-based");
    --idx;
  } else {
    const std::string s(text::trim(v.get<std::string>()));
    if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'Z') {
      idx = static_cast<std::size_t>(s[0] - 'A');
    } else if (s.size() == 1 && s[0] >= '1' && s[0] <= '9') {
      idx = static_cast<std::size_t>(s[0] - '1');
    } else {
      throw DataError("unrecognized label '" + s + "'");
    }
  }
  if (idx >= n_choices) throw DataError("label out of range");
  return idx;
}

InstanceRecord parse_socialiqa(const json& j, std::size_t line, const std::optional<std::string>& sidecar) {
  InstanceRecord r;
  r.id = id_of(j, "id", line);
  r.dataset = DatasetTag::kSocialIqa;
  r.context = required_text(j, "context");
  r.question = required_text(j, "question");
  if (j.contains("promptDim") && j["promptDim"].is_string()) r.question_type = j["promptDim"].get<std::string>();
  r.choices = {required_text(j, "answerA"), required_text(j, "answerB"), required_text(j, "answerC")};
  if (sidecar) {
    r.gold = parse_label(json(*sidecar), 3);
  } else if (j.contains("label")) {
    r.gold = parse_label(j["label"], 3);
  } else if (j.contains("correct")) {
    r.gold = parse_label(j["correct"], 3);
  } else {
    throw DataError("no label");
  }
  return r;
}

InstanceRecord parse_arc(const json& j, std::size_t line, DatasetTag tag) {
  InstanceRecord r;
  r.id = id_of(j, "id", line);
  r.dataset = tag;
  const json& q = j.at("question");
  r.question = required_text(q, "stem");
  std::vector<std::string> labels;
  for (const auto& c : q.at("choices")) {
    r.choices.push_back(required_text(c, "text"));
    labels.push_back(c.at("label").get<std::string>());
  }
  if (r.choices.size() < 2 || r.choices.size() > 5) throw DataError("expected 2 to 5 choices");
  const std::string key = j.at("answerKey").get<std::string>();
  const auto it = std::find(labels.begin(), labels.end(), key);
  if (it == labels.end()) throw DataError("answerKey '" + key + "' matches no choice label");
  r.gold = static_cast<std::size_t>(it - labels.begin());
  return r;
}

std::vector<std::string> parse_csv_row(const std::string& line) {
  using Sep = boost::escaped_list_separator<char>;
  boost::tokenizer<Sep> tok(line, Sep('\0', ',', '"'));
  return {tok.begin(), tok.end()};
}

Dataset load_sct(const std::filesystem::path& path) {
  Dataset d;
  const auto lines = read_lines(path);
  std::vector<std::string> header;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    ++d.diagnostics.lines;
    std::vector<std::string> row;
    try {
      row = parse_csv_row(lines[i]);
    } catch (const std::exception& e) {
      ++d.diagnostics.skipped;
      d.diagnostics.messages.push_back("line " + std::to_string(i + 1) + ": " + e.what());
      continue;
    }
    if (header.empty()) {
      header = row;
      continue;
    }
    auto col = [&](std::string_view name) -> const std::string& {
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (text::trim(header[c]) == name) {
          if (c >= row.size()) throw DataError("row has too few columns");
          return row[c];
        }
      }
      throw DataError("missing column " + std::string(name));
    };
    try {
      InstanceRecord r;
      r.id = col("InputStoryid");
      r.dataset = DatasetTag::kSct;
      for (int s = 1; s <= 4; ++s) {
        const std::string sentence(text::trim(col("InputSentence" + std::to_string(s))));
        if (sentence.empty()) throw DataError("empty story sentence");
        if (!r.context.empty()) r.context.push_back(' ');
        r.context += sentence;
      }
      r.choices = {std::string(text::trim(col("RandomFifthSentenceQuiz1"))),
                   std::string(text::trim(col("RandomFifthSentenceQuiz2")))};
      if (r.choices[0].empty() || r.choices[1].empty()) throw DataError("empty ending");
      r.gold = parse_label(json(std::string(text::trim(col("AnswerRightEnding")))), 2);
      d.instances.push_back(std::move(r));
    } catch (const std::exception& e) {
      ++d.diagnostics.skipped;
      d.diagnostics.messages.push_back("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (d.diagnostics.lines > 0) --d.diagnostics.lines;  // header
  if (d.diagnostics.lines == 0) d.diagnostics.messages.push_back("no records in " + path.string());
  return d;
}

std::optional<std::vector<std::string>> socialiqa_labels(const std::filesystem::path& path) {
  auto sidecar = path.parent_path() / (path.stem().string() + "-labels.lst");
  if (!std::filesystem::exists(sidecar)) return std::nullopt;
  std::vector<std::string> labels;
  for (auto& l : read_lines(sidecar)) {
    if (!text::trim(l).empty()) labels.emplace_back(text::trim(l));
  }
  return labels;
}

}  // namespace

std::string_view dataset_name(DatasetTag tag) {
  switch (tag) {
    case DatasetTag::kCopa:
      return "copa";
    case DatasetTag::kSct:
      return "sct";
    case DatasetTag::kSocialIqa:
      return "socialiqa";
    case DatasetTag::kArc:
      return "arc";
    case DatasetTag::kObqa:
      return "obqa";
  }
  return "copa";
}

DatasetTag dataset_from_name(std::string_view name) {
  const std::string n = text::ascii_lower(name);
  if (n == "copa") return DatasetTag::kCopa;
  if (n == "sct") return DatasetTag::kSct;
  if (n == "socialiqa" || n == "siqa") return DatasetTag::kSocialIqa;
  if (n == "arc" || n == "arc-easy" || n == "arc-challenge") return DatasetTag::kArc;
  if (n == "obqa") return DatasetTag::kObqa;
  throw InvalidArgument("unknown dataset tag '" + std::string(name) + "'");
}

std::string InstanceRecord::question_text() const {
  if (context.empty()) return question;
  if (question.empty()) return context;
  return context + " " + question;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetTag tag) {
  if (tag == DatasetTag::kSct) return load_sct(path);

  Dataset d;
  const auto lines = read_lines(path);
  std::optional<std::vector<std::string>> labels;
  if (tag == DatasetTag::kSocialIqa) labels = socialiqa_labels(path);

  std::size_t record = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    ++d.diagnostics.lines;
    const std::size_t this_record = record++;
    try {
      const json j = json::parse(lines[i]);
      switch (tag) {
        case DatasetTag::kCopa:
          d.instances.push_back(parse_copa(j, i + 1));
          break;
        case DatasetTag::kSocialIqa: {
          std::optional<std::string> label;
          if (labels) {
            if (this_record >= labels->size()) throw DataError("labels file is shorter than the data");
            label = (*labels)[this_record];
          }
          d.instances.push_back(parse_socialiqa(j, i + 1, label));
          break;
        }
        case DatasetTag::kArc:
        case DatasetTag::kObqa:
          d.instances.push_back(parse_arc(j, i + 1, tag));
          break;
        case DatasetTag::kSct:
          break;
      }
    } catch (const std::exception& e) {
      ++d.diagnostics.skipped;
      d.diagnostics.messages.push_back("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (d.diagnostics.lines == 0) d.diagnostics.messages.push_back("no records in " + path.string());
  return d;
}

}  // namespace cas
