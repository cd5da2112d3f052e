#include "rds/external_model.hpp"

#include "rds/errors.hpp"

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace rds {
namespace {

constexpr char kMagic[4] = {'R', 'D', 'X', '1'};

void put_u64(std::vector<unsigned char>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<unsigned char>& buf, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(buf, bits);
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) {
  const std::uint64_t bits = get_u64(p);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

void write_all(int fd, const unsigned char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::write(fd, data, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("external model: write failed: " + std::string(std::strerror(errno)));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

// Returns bytes read; short count means the child closed the pipe.
std::size_t read_some(int fd, unsigned char* data, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::read(fd, data + got, n - got);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("external model: read failed: " + std::string(std::strerror(errno)));
    }
    if (r == 0) break;
    got += static_cast<std::size_t>(r);
  }
  return got;
}

}  // namespace

ExternalModel::ExternalModel(const std::string& command) : command_(command) {
  int to_pipe[2];    // parent -> child
  int from_pipe[2];  // child -> parent
  if (::pipe(to_pipe) != 0 || ::pipe(from_pipe) != 0)
    throw std::runtime_error("external model: pipe() failed");

  const pid_t pid = ::fork();
  if (pid < 0) throw std::runtime_error("external model: fork() failed");

  if (pid == 0) {
    ::dup2(to_pipe[0], STDIN_FILENO);
    ::dup2(from_pipe[1], STDOUT_FILENO);
    ::close(to_pipe[0]);
    ::close(to_pipe[1]);
    ::close(from_pipe[0]);
    ::close(from_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  ::close(to_pipe[0]);
  ::close(from_pipe[1]);
  to_child_ = to_pipe[1];
  from_child_ = from_pipe[0];
  pid_ = pid;
}

ExternalModel::~ExternalModel() {
  close_pipes();
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(static_cast<pid_t>(pid_), &status, 0);
  }
}

ExternalModel::ExternalModel(ExternalModel&& other) noexcept
    : command_(std::move(other.command_)),
      to_child_(other.to_child_),
      from_child_(other.from_child_),
      pid_(other.pid_) {
  other.to_child_ = other.from_child_ = -1;
  other.pid_ = -1;
}

ExternalModel& ExternalModel::operator=(ExternalModel&& other) noexcept {
  if (this != &other) {
    close_pipes();
    if (pid_ > 0) {
      int status = 0;
      ::waitpid(static_cast<pid_t>(pid_), &status, 0);
    }
    command_ = std::move(other.command_);
    to_child_ = other.to_child_;
    from_child_ = other.from_child_;
    pid_ = other.pid_;
    other.to_child_ = other.from_child_ = -1;
    other.pid_ = -1;
  }
  return *this;
}

void ExternalModel::close_pipes() noexcept {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
}

Tensor ExternalModel::predict(const Tensor& x_t, double t) {
  if (to_child_ < 0 || from_child_ < 0)
    throw std::runtime_error("external model: handle is closed");

  std::vector<unsigned char> msg;
  msg.reserve(20 + 8 * (2 + static_cast<std::size_t>(x_t.rank()) +
                        static_cast<std::size_t>(x_t.size())));
  msg.insert(msg.end(), kMagic, kMagic + 4);
  const std::uint64_t payload =
      8 + 8 + 8 * static_cast<std::uint64_t>(x_t.rank()) + 8 * static_cast<std::uint64_t>(x_t.size());
  put_u64(msg, payload);
  put_f64(msg, t);
  put_u64(msg, static_cast<std::uint64_t>(x_t.rank()));
  for (Index d : x_t.shape()) put_u64(msg, static_cast<std::uint64_t>(d));
  for (Index i = 0; i < x_t.size(); ++i) put_f64(msg, x_t[i]);
  write_all(to_child_, msg.data(), msg.size());

  unsigned char head[12];
  if (read_some(from_child_, head, 12) != 12)
    throw format_error("external model: truncated response header", 0);
  if (std::memcmp(head, kMagic, 4) != 0)
    throw format_error("external model: bad response magic", 0);
  const std::uint64_t len = get_u64(head + 4);
  if (len < 8) throw format_error("external model: response payload too short", 4);

  std::vector<unsigned char> body(len);
  if (read_some(from_child_, body.data(), len) != len)
    throw format_error("external model: truncated response payload", 12);

  const std::uint64_t rank = get_u64(body.data());
  if (rank == 0 || rank > 2) throw format_error("external model: bad response rank", 12);
  if (len < 8 + 8 * rank) throw format_error("external model: response shape truncated", 20);
  Shape shape;
  std::uint64_t count = 1;
  for (std::uint64_t i = 0; i < rank; ++i) {
    const std::uint64_t d = get_u64(body.data() + 8 + 8 * i);
    shape.push_back(static_cast<Index>(d));
    count *= d;
  }
  if (len != 8 + 8 * rank + 8 * count)
    throw format_error("external model: response size mismatch", 12 + 8 + 8 * rank);

  Tensor out(shape);
  const unsigned char* values = body.data() + 8 + 8 * rank;
  for (std::uint64_t i = 0; i < count; ++i)
    out[static_cast<Index>(i)] = get_f64(values + 8 * i);
  return out;
}

}  // namespace rds
