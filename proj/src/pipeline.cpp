#include "lpvmpc/pipeline.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace lpvmpc {

namespace {

/// Refinement applied by the intake stage before a state reaches the
/// optimizer: wrap the heading, keep the speed inside the model domain.
VehicleState refine(VehicleState s) {
  s.psi = wrap_angle(s.psi);
  s.vx = std::max(s.vx, kMinLpvSpeed);
  return s;
}

class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(StateSample sample) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [this] { return queue_.size() < capacity_; });
    queue_.push_back(std::move(sample));
    not_empty_.notify_one();
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
  }

  std::optional<StateSample> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [this] { return !queue_.empty() || closed_; });
    if (queue_.empty()) {
      return std::nullopt;
    }
    StateSample sample = std::move(queue_.front());
    queue_.pop_front();
    not_full_.notify_one();
    return sample;
  }

  std::optional<StateSample> try_pop() {
    std::lock_guard lock(mutex_);
    if (queue_.empty()) {
      return std::nullopt;
    }
    StateSample sample = std::move(queue_.front());
    queue_.pop_front();
    not_full_.notify_one();
    return sample;
  }

 private:
  std::mutex mutex_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<StateSample> queue_;
  std::size_t capacity_;
  bool closed_ = false;
};

}  // namespace

PipelineSummary run_pipeline(const StateSource& source, const CommandSink& sink,
                             MpcController& controller, const ControlInput& initial_input,
                             PipelineMode mode, std::size_t queue_capacity) {
  PipelineSummary summary;
  const double stale_age = 2.0 * controller.config().ts;
  ControlInput prev = initial_input;
  ControlCommand last_command;
  bool have_command = false;

  auto optimize = [&](const StateSample& sample, double latest_t) {
    TimedCommand out;
    out.t_state = sample.t;
    out.t_latest = latest_t;
    if (latest_t - sample.t > stale_age) {
      if (!have_command) {
        // Nothing to hold yet; the stale sample is dropped.
        ++summary.skipped;
        return;
      }
      out.command = last_command;
      out.held = true;
      ++summary.held;
    } else {
      out.command = controller.step(sample.state, prev);
      prev = ControlInput{out.command.a, out.command.delta};
      last_command = out.command;
      have_command = true;
      ++summary.computed;
    }
    ++summary.cycles;
    sink(out);
  };

  if (mode == PipelineMode::lockstep) {
    double newest = -std::numeric_limits<double>::infinity();
    while (auto sample = source()) {
      sample->state = refine(sample->state);
      newest = std::max(newest, sample->t);
      optimize(*sample, newest);
    }
    return summary;
  }

  BoundedQueue queue(queue_capacity);

  std::thread intake([&] {
    while (auto sample = source()) {
      sample->state = refine(sample->state);
      queue.push(std::move(*sample));
    }
    queue.close();
  });

  // Staleness is judged against the newest timestamp this stage has received:
  // when it falls behind, the backlog is drained in one batch and samples
  // superseded by more than the stale age turn into holds.
  double newest = -std::numeric_limits<double>::infinity();
  while (auto sample = queue.pop()) {
    std::vector<StateSample> batch;
    batch.push_back(std::move(*sample));
    while (auto more = queue.try_pop()) {
      batch.push_back(std::move(*more));
    }
    for (const StateSample& s : batch) {
      newest = std::max(newest, s.t);
    }
    for (const StateSample& s : batch) {
      optimize(s, newest);
    }
  }
  intake.join();
  return summary;
}

}  // namespace lpvmpc
