#pragma once

#include <cstdint>
#include <string_view>

#include "json.hpp"
#include "oracle_thrift/core.hpp"
#include "oracle_thrift/oracle.hpp"

namespace oracle_thrift {

/// A bandit algorithm driven round by round: select(t), then observe() the
/// semi-bandit feedback of the played action. All oracle access goes through
/// the owned BatchExecutor.
class Policy {
 public:
  explicit Policy(BatchExecutor executor) : executor_(std::move(executor)) {}
  virtual ~Policy() = default;
  Policy(const Policy&) = delete;
  Policy& operator=(const Policy&) = delete;

  virtual std::string_view name() const = 0;
  virtual Action select(std::uint64_t t) = 0;
  virtual void observe(const Observation& obs) = 0;
  virtual nlohmann::json metadata() const { return nlohmann::json::object(); }

  const ComplexityLedger& ledger() const noexcept { return executor_.ledger(); }

 protected:
  std::vector<OracleResult> query(const OracleBatch& batch) { return executor_.execute(batch); }
  OracleResult query_one(OracleQuery q) { return executor_.execute_one(std::move(q)); }

 private:
  BatchExecutor executor_;
};

}  // namespace oracle_thrift
