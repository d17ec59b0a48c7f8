#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cas {

enum class DatasetTag { kCopa, kSct, kSocialIqa, kArc, kObqa };

std::string_view dataset_name(DatasetTag tag);
// "copa", "sct", "socialiqa", "arc", "obqa". Throws InvalidArgument otherwise.
DatasetTag dataset_from_name(std::string_view name);

struct InstanceRecord {
  std::string id;
  DatasetTag dataset = DatasetTag::kCopa;
  std::string context;   // premise, story, or SocialIQA context
  std::string question;  // ARC/OBQA stem, SocialIQA question; empty for COPA and SCT
  std::string question_type;  // COPA "cause"/"effect", SocialIQA category when given
  std::vector<std::string> choices;
  std::size_t gold = 0;

  // Text the question keywords are extracted from.
  std::string question_text() const;
};

struct LoadDiagnostics {
  std::size_t lines = 0;
  std::size_t skipped = 0;
  std::vector<std::string> messages;  // one per skip, "line N: reason"
};

struct Dataset {
  std::vector<InstanceRecord> instances;
  LoadDiagnostics diagnostics;
};

// Published layouts:
//   copa       SuperGLUE JSONL: premise, choice1, choice2, question, label, idx
//   sct        ROCStories cloze CSV with header: InputStoryid, InputSentence1..4,
//              RandomFifthSentenceQuiz1/2, AnswerRightEnding (1 or 2)
//   socialiqa  JSONL: context, question, answerA/B/C; labels 1-3 from the
//              sibling "<stem>-labels.lst" file, or an inline "label"/"correct"
//   arc, obqa  JSONL: id, question{stem, choices[{text, label}]}, answerKey
// Malformed records are skipped and reported. Throws DataError when the
// file cannot be read.
Dataset load_dataset(const std::filesystem::path& path, DatasetTag tag);

}  // namespace cas
