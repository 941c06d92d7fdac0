#include "quantiscene/protocol.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "quantiscene/errors.hpp"
#include "quantiscene/json_fwd.hpp"
#include "quantiscene/parallel.hpp"
#include "quantiscene/rng.hpp"

namespace quantiscene {

namespace {

constexpr std::size_t kMaxLineBytes = 1 << 20;

std::string excerpt(std::string_view line) {
  constexpr std::size_t kShown = 80;
  return line.size() <= kShown ? std::string(line) : std::string(line.substr(0, kShown)) + "...";
}

class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command) {
    int to_child[2], from_child[2];
    if (pipe2(to_child, O_CLOEXEC) != 0) throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
    if (pipe2(from_child, O_CLOEXEC) != 0) {
      close(to_child[0]);
      close(to_child[1]);
      throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
    }
    pid_ = fork();
    if (pid_ < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) close(fd);
      throw ProtocolError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
      // Own process group, so that killing the subject also reaches whatever the shell spawned.
      setpgid(0, 0);
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      signal(SIGPIPE, SIG_DFL);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    setpgid(pid_, pid_);
    close(to_child[0]);
    close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
    fcntl(in_, F_SETFL, fcntl(in_, F_GETFL) | O_NONBLOCK);
    fcntl(out_, F_SETFL, fcntl(out_, F_GETFL) | O_NONBLOCK);
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() {
    close_input();
    if (out_ >= 0) close(out_);
    if (pid_ > 0) {
      // Give a well-behaved subject a moment to exit on end of input.
      for (int i = 0; i < 50; ++i) {
        if (waitpid(pid_, nullptr, WNOHANG) == pid_) return;
        usleep(10'000);
      }
      kill(-pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
  }

  void kill_now() {
    if (pid_ > 0) {
      kill(-pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

  void close_input() {
    if (in_ >= 0) close(in_);
    in_ = -1;
  }

  int input() const noexcept { return in_; }
  int output() const noexcept { return out_; }

 private:
  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
};

class ExternalSession {
 public:
  ExternalSession(const std::string& command, const ExternalOptions& options)
      : options_(options), child_(command) {
    struct sigaction ignore {};
    ignore.sa_handler = SIG_IGN;
    sigaction(SIGPIPE, &ignore, nullptr);
  }

  /// Sends one batch and collects its answers in record order. On failure the
  /// answers received so far are left in `received`.
  void exchange(const std::vector<InstanceRecord>& records, std::size_t begin, std::size_t end,
                std::unordered_map<std::string, bool>& received) {
    std::string outgoing;
    std::unordered_map<std::string, bool> pending;
    for (std::size_t i = begin; i < end; ++i) {
      outgoing += request_line(records[i], options_.image_root);
      outgoing += '\n';
      pending.emplace(records[i].id, true);
    }
    std::size_t written = 0;
    const auto deadline = std::chrono::steady_clock::now() + options_.batch_timeout;
    while (!pending.empty()) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        throw SubjectTimeout("no answer within " + std::to_string(options_.batch_timeout.count()) +
                             " ms for " + std::to_string(pending.size()) + " of " +
                             std::to_string(end - begin) + " requests in the batch");
      }
      pollfd fds[2] = {{child_.output(), POLLIN, 0}, {child_.input(), POLLOUT, 0}};
      const nfds_t count = written < outgoing.size() && child_.input() >= 0 ? 2 : 1;
      const int ready = poll(fds, count, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("poll: ") + std::strerror(errno));
      }
      if (count == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        const ssize_t n = write(child_.input(), outgoing.data() + written, outgoing.size() - written);
        if (n > 0) {
          written += static_cast<std::size_t>(n);
        } else if (n < 0 && errno != EAGAIN && errno != EINTR) {
          throw ProtocolError("subject stopped reading requests (" +
                              std::string(std::strerror(errno)) + ")");
        }
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        char chunk[65536];
        const ssize_t n = read(child_.output(), chunk, sizeof chunk);
        if (n == 0) {
          throw ProtocolError("subject exited with " + std::to_string(pending.size()) +
                              " answers of the batch missing");
        }
        if (n < 0) {
          if (errno == EAGAIN || errno == EINTR) continue;
          throw ProtocolError(std::string("read: ") + std::strerror(errno));
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
        consume_lines(pending, received);
      }
    }
  }

  void kill() { child_.kill_now(); }

 private:
  void consume_lines(std::unordered_map<std::string, bool>& pending,
                     std::unordered_map<std::string, bool>& received) {
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer_.find('\n', start)) != std::string::npos; start = nl + 1) {
      std::string_view line(buffer_.data() + start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
      const SubjectAnswer answer = parse_response(line);
      if (pending.erase(answer.id) == 1) {
        received[answer.id] = answer.answer;
      } else if (received.count(answer.id)) {
        throw ProtocolError("duplicate answer for id '" + excerpt(answer.id) + "'");
      } else {
        throw ProtocolError("answer for unknown id '" + excerpt(answer.id) + "'");
      }
    }
    buffer_.erase(0, start);
    if (buffer_.size() > kMaxLineBytes) {
      throw ProtocolError("response line longer than " + std::to_string(kMaxLineBytes) + " bytes");
    }
  }

  ExternalOptions options_;
  ChildProcess child_;
  std::string buffer_;
};

}  // namespace

std::string request_line(const InstanceRecord& record, const std::filesystem::path& image_root) {
  Json j;
  j["id"] = record.id;
  j["image"] = (image_root / record.image_path).string();
  j["caption"] = record.caption_text;
  return j.dump();
}

SubjectAnswer parse_response(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("malformed response line: " + excerpt(line));
  }
  if (!j.is_object()) throw ProtocolError("response is not a JSON object: " + excerpt(line));
  const auto id = j.find("id");
  const auto answer = j.find("answer");
  if (id == j.end() || !id->is_string()) {
    throw ProtocolError("response without a string id: " + excerpt(line));
  }
  if (answer == j.end() || !answer->is_boolean()) {
    throw ProtocolError("response without a boolean answer: " + excerpt(line));
  }
  return {id->get<std::string>(), answer->get<bool>()};
}

SubjectRun run_external(const std::string& command, const std::vector<InstanceRecord>& records,
                        const ExternalOptions& options, std::size_t start) {
  if (options.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (start > records.size()) throw std::invalid_argument("resume cursor beyond the dataset");
  SubjectRun run;
  run.cursor = start;
  std::unordered_map<std::string, bool> received;
  try {
    ExternalSession session(command, options);
    try {
      for (std::size_t begin = start; begin < records.size(); begin += options.batch_size) {
        const std::size_t end = std::min(records.size(), begin + options.batch_size);
        session.exchange(records, begin, end, received);
      }
    } catch (...) {
      session.kill();
      throw;
    }
  } catch (const ProtocolError&) {
    run.error = std::current_exception();
  } catch (const SubjectTimeout&) {
    run.error = std::current_exception();
  }
  // Keep the answered prefix so a resumed run never asks twice.
  for (std::size_t i = start; i < records.size(); ++i) {
    const auto it = received.find(records[i].id);
    if (it == received.end()) break;
    run.answers.push_back({records[i].id, it->second});
    run.cursor = i + 1;
  }
  return run;
}

std::uint64_t trial_seed(std::uint64_t subject_seed, std::string_view instance_id) noexcept {
  return derive_seed(subject_seed, hash_tag(instance_id));
}

std::vector<SubjectAnswer> run_builtin(const SubjectKind& subject,
                                       const std::vector<InstanceRecord>& records,
                                       std::uint64_t subject_seed, unsigned threads) {
  std::vector<SubjectAnswer> answers(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const InstanceRecord& r = records[i];
    if (!r.scene) throw DatasetError("record '" + r.id + "' has no inline scene");
    answers[i] = {r.id, answer_caption(subject, *r.scene, r.caption_ast,
                                       trial_seed(subject_seed, r.id))};
  });
  return answers;
}

std::size_t serve_builtin(const SubjectKind& subject,
                          const std::map<std::string, const InstanceRecord*>& records,
                          std::uint64_t subject_seed, std::istream& in, std::ostream& out,
                          std::ostream& log) {
  std::size_t answered = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json request = Json::parse(line);
      const std::string id = request.at("id").get<std::string>();
      const auto it = records.find(id);
      if (it == records.end() || !it->second->scene) {
        log << "unknown id '" << excerpt(id) << "'\n";
        continue;
      }
      const InstanceRecord& r = *it->second;
      // The caption on the wire is authoritative; it must parse.
      const CaptionAST caption = request.contains("caption")
                                     ? parse(request.at("caption").get<std::string>())
                                     : r.caption_ast;
      Json response;
      response["id"] = id;
      response["answer"] = answer_caption(subject, *r.scene, caption, trial_seed(subject_seed, id));
      out << response.dump() << '\n' << std::flush;
      ++answered;
    } catch (const std::exception& e) {
      log << "skipped request: " << e.what() << '\n';
    }
  }
  return answered;
}

}  // namespace quantiscene
