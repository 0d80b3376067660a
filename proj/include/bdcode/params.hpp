/*
 * Copyright 2026 The bdcode Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace bdcode {

using Count = std::int64_t;
using Rational = boost::multiprecision::cpp_rational;

/// Thrown when an exact integer result does not fit in Count.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

Count checked_mul(Count a, Count b);
Count checked_add(Count a, Count b);

/// Exact binomial coefficient. Returns 0 for k < 0 or k > n.
Count binomial(Count n, Count k);

/// Parses "p/q" or "p" into an exact rational. Throws std::invalid_argument.
Rational parse_rational(const std::string& text);
std::string format_rational(const Rational& value);
double to_double(const Rational& value);

enum class ParameterViolation {
  kNonPositive,
  kStorageOutOfRange,
  kFinishersNotInteger,
  kServersPerBatchNotInteger,
  kRowsPerServerNotInteger,
  kPartitionsNotDividingSourceRows,
  kPartitionsNotDividingCodedRows,
  kBatchSizeNotInteger,
  kFinishersNotDividingVectors,
  kCodedRowsBelowSourceRows,
};

const char* to_string(ParameterViolation violation);

class ParameterError : public std::invalid_argument {
 public:
  ParameterError(ParameterViolation violation, const std::string& detail);
  ParameterViolation violation() const noexcept { return violation_; }

 private:
  ParameterViolation violation_;
};

/// Unvalidated input tuple. `storage` is the fraction of the source matrix
/// each server stores.
struct RawParameters {
  Count source_rows = 0;
  Count columns = 0;
  Count vectors = 0;
  Count servers = 0;
  Rational storage{0};
  Count coded_rows = 0;
  Count partitions = 1;
};

/// Validated system parameters plus the derived combinatorial quantities.
/// Only obtainable through validate_parameters().
struct SystemParameters {
  Count source_rows = 0;
  Count columns = 0;
  Count vectors = 0;
  Count servers = 0;
  Rational storage{0};
  Count coded_rows = 0;
  Count partitions = 1;

  // Derived.
  Count finishers = 0;          // servers that must finish before the shuffle: K*m/r
  Count servers_per_batch = 0;  // storage * finishers
  Count rows_per_server = 0;    // storage * source_rows
  Count batch_count = 0;
  Count batch_size = 0;
  Count rows_per_partition = 0;
  Count decode_threshold = 0;   // source rows per partition
  Count vectors_per_finisher = 0;

  RawParameters raw() const;
  /// Same system with a different partition count, revalidated.
  SystemParameters with_partitions(Count partitions) const;

  friend bool operator==(const SystemParameters&, const SystemParameters&) = default;
};

SystemParameters validate_parameters(const RawParameters& raw);

}  // namespace bdcode
