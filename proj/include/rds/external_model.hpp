#pragma once

#include "rds/tensor.hpp"

#include <string>

namespace rds {

/// Out-of-process data-prediction model. The child is spawned once and
/// spoken to over stdin/stdout with a length-prefixed binary protocol:
///
///   request :  "RDX1" | payload length (u64 LE) | t (f64 LE) |
///              rank (u64 LE) | dims (u64 LE each) | values (f64 LE each)
///   response:  "RDX1" | payload length (u64 LE) |
///              rank (u64 LE) | dims (u64 LE each) | values (f64 LE each)
///
/// Requests are serialized; the handle is single-owner.
class ExternalModel {
 public:
  explicit ExternalModel(const std::string& command);
  ~ExternalModel();

  ExternalModel(const ExternalModel&) = delete;
  ExternalModel& operator=(const ExternalModel&) = delete;
  ExternalModel(ExternalModel&& other) noexcept;
  ExternalModel& operator=(ExternalModel&& other) noexcept;

  Tensor predict(const Tensor& x_t, double t);

  const std::string& command() const { return command_; }

 private:
  void close_pipes() noexcept;

  std::string command_;
  int to_child_ = -1;
  int from_child_ = -1;
  long pid_ = -1;
};

}  // namespace rds
