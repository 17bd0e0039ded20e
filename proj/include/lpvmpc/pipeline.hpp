#pragma once

#include <functional>
#include <optional>

#include "lpvmpc/controller.hpp"

namespace lpvmpc {

struct StateSample {
  double t = 0.0;
  VehicleState state;
};

struct TimedCommand {
  double t_state = 0.0;  ///< timestamp of the state the command was computed from
  double t_latest = 0.0; ///< newest state timestamp the optimizer had seen
  ControlCommand command;
  bool held = false;     ///< previous command re-emitted because the state was stale
};

enum class PipelineMode { lockstep, concurrent };

struct PipelineSummary {
  long cycles = 0;     ///< commands emitted
  long held = 0;       ///< staleness holds
  long computed = 0;   ///< full optimization cycles
  long skipped = 0;    ///< stale samples dropped before any command existed
};

using StateSource = std::function<std::optional<StateSample>()>;
using CommandSink = std::function<void(const TimedCommand&)>;

/// Two-stage loop: a state intake/refinement stage feeds an optimization
/// stage over a bounded queue; the stages exchange timestamped messages. A
/// state older than 2*Ts relative to the newest published one is not
/// optimized over: the previous command is held and the staleness counter
/// incremented. Lockstep mode runs both stages serially per tick so results
/// are bit-reproducible.
PipelineSummary run_pipeline(const StateSource& source, const CommandSink& sink,
                             MpcController& controller, const ControlInput& initial_input,
                             PipelineMode mode, std::size_t queue_capacity = 8);

}  // namespace lpvmpc
