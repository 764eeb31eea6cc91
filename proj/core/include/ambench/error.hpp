#pragma once

#include <stdexcept>
#include <string>

namespace ambench {

/// Pipeline stage a failure is attributed to. Mirrors the report taxonomy.
enum class FailStage { none, codegen, perception, execution };

inline const char* to_string(FailStage s) {
  switch (s) {
    case FailStage::none: return "none";
    case FailStage::codegen: return "codegen";
    case FailStage::perception: return "perception";
    case FailStage::execution: return "execution";
  }
  return "none";
}

/// Runtime error carrying the stage that produced it.
class Error : public std::runtime_error {
 public:
  explicit Error(std::string msg, FailStage stage = FailStage::none)
      : std::runtime_error(std::move(msg)), stage_(stage) {}

  FailStage stage() const noexcept { return stage_; }

 private:
  FailStage stage_;
};

}  // namespace ambench
