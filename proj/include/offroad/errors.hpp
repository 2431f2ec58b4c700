#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

namespace offroad {

enum class ErrorKind {
  InvalidArgument,
  UnsupportedGeometry,
  DegeneratePolygon,
  NoTrailNearStart,
  NoTrailPath,
  NoGridPath,
  SliceExhausted,
  Timeout,
  Io,
};

const char* to_string(ErrorKind kind);

/// Every recoverable failure in the planner is reported as a PlanningError.
/// `stage` names the pipeline stage that gave up; `index` carries the offending
/// feature or segment index when there is one.
class PlanningError : public std::runtime_error {
 public:
  PlanningError(ErrorKind kind, const std::string& what, std::string stage = {},
                std::optional<size_t> index = std::nullopt)
      : std::runtime_error(what), kind_(kind), stage_(std::move(stage)), index_(index) {}

  ErrorKind kind() const { return kind_; }
  const std::string& stage() const { return stage_; }
  std::optional<size_t> index() const { return index_; }

  PlanningError with_stage(std::string stage) const {
    return PlanningError(kind_, what(), std::move(stage), index_);
  }

 private:
  ErrorKind kind_;
  std::string stage_;
  std::optional<size_t> index_;
};

/// Wall-clock budget checked cooperatively by the long-running searches.
class Deadline {
 public:
  using Clock = std::chrono::steady_clock;

  Deadline() = default;
  explicit Deadline(std::chrono::duration<double> budget)
      : end_(Clock::now() + std::chrono::duration_cast<Clock::duration>(budget)) {}

  static Deadline none() { return Deadline(); }

  bool expired() const { return end_ && Clock::now() >= *end_; }

  void check(const char* stage) const {
    if (expired()) throw PlanningError(ErrorKind::Timeout, "time budget exceeded", stage);
  }

 private:
  std::optional<Clock::time_point> end_;
};

}  // namespace offroad
