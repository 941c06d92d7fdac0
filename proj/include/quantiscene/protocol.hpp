#pragma once

#include <chrono>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "quantiscene/psychometrics.hpp"
#include "quantiscene/record.hpp"
#include "quantiscene/subjects.hpp"

namespace quantiscene {

/// Request line sent to an external subject:
/// {"id": "...", "image": "<path>", "caption": "..."}
std::string request_line(const InstanceRecord& record, const std::filesystem::path& image_root);

/// Parses a response line {"id": "...", "answer": true|false}. Other keys are
/// ignored. Throws ProtocolError.
SubjectAnswer parse_response(std::string_view line);

struct ExternalOptions {
  std::size_t batch_size = 64;
  std::chrono::milliseconds batch_timeout{60'000};
  /// Prefix for image paths in requests, normally the dataset directory.
  std::filesystem::path image_root;
};

/// Outcome of a run that may have stopped early.
struct SubjectRun {
  /// Answers for records [start, cursor), in record order.
  std::vector<SubjectAnswer> answers;
  /// First record without an answer; pass as `start` to resume.
  std::size_t cursor = 0;
  /// ProtocolError or SubjectTimeout when the run stopped early.
  std::exception_ptr error;

  bool complete() const noexcept { return !error; }
};

/// Runs `/bin/sh -c command` and exchanges protocol lines over its standard
/// streams, one batch at a time. Responses within a batch may arrive in any
/// order. Never throws for subject misbehaviour; see SubjectRun::error.
SubjectRun run_external(const std::string& command, const std::vector<InstanceRecord>& records,
                        const ExternalOptions& options, std::size_t start = 0);

/// Per-trial seed of a built-in subject.
std::uint64_t trial_seed(std::uint64_t subject_seed, std::string_view instance_id) noexcept;

/// Answers of a built-in subject in record order; records need inline scenes.
std::vector<SubjectAnswer> run_builtin(const SubjectKind& subject,
                                       const std::vector<InstanceRecord>& records,
                                       std::uint64_t subject_seed, unsigned threads = 0);

/// Serves a built-in subject over the line protocol, looking up scenes by
/// request id. Returns the number of answered requests. Malformed requests and
/// unknown ids are reported on `log` and skipped.
std::size_t serve_builtin(const SubjectKind& subject,
                          const std::map<std::string, const InstanceRecord*>& records,
                          std::uint64_t subject_seed, std::istream& in, std::ostream& out,
                          std::ostream& log);

}  // namespace quantiscene
