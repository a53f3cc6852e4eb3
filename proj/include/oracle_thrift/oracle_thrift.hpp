#pragma once

#include "oracle_thrift/core.hpp"
#include "oracle_thrift/oracle.hpp"
#include "oracle_thrift/envs.hpp"
#include "oracle_thrift/schedule.hpp"
#include "oracle_thrift/policy.hpp"
#include "oracle_thrift/algo_linear.hpp"
#include "oracle_thrift/algo_cov.hpp"
#include "oracle_thrift/algo_general.hpp"
#include "oracle_thrift/runner.hpp"
