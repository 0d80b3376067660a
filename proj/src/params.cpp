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

#include "bdcode/params.hpp"

#include <numeric>
#include <sstream>

namespace bdcode {

Count checked_mul(Count a, Count b) {
  Count out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw OverflowError("integer overflow in multiplication");
  }
  return out;
}

Count checked_add(Count a, Count b) {
  Count out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw OverflowError("integer overflow in addition");
  }
  return out;
}

Count binomial(Count n, Count k) {
  if (n < 0) throw std::invalid_argument("binomial: negative n");
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  // result * (n - i) is always divisible by (i + 1); divide through the gcd
  // first so the intermediate stays as small as the final answer allows.
  Count result = 1;
  for (Count i = 0; i < k; ++i) {
    Count num = n - i;
    Count den = i + 1;
    Count g = std::gcd(result, den);
    result /= g;
    den /= g;
    num /= den;  // den now divides num
    result = checked_mul(result, num);
  }
  return result;
}

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      long long v = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return Rational(v);
    }
    std::string num_text = text.substr(0, slash);
    std::string den_text = text.substr(slash + 1);
    long long num = std::stoll(num_text, &used);
    if (used != num_text.size()) throw std::invalid_argument(text);
    long long den = std::stoll(den_text, &used);
    if (used != den_text.size()) throw std::invalid_argument(text);
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Rational(num, den);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("not a rational number: '" + text + "'");
  }
}

std::string format_rational(const Rational& value) {
  std::ostringstream os;
  os << numerator(value);
  if (denominator(value) != 1) os << '/' << denominator(value);
  return os.str();
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

const char* to_string(ParameterViolation violation) {
  switch (violation) {
    case ParameterViolation::kNonPositive: return "non_positive";
    case ParameterViolation::kStorageOutOfRange: return "storage_out_of_range";
    case ParameterViolation::kFinishersNotInteger: return "finishers_not_integer";
    case ParameterViolation::kServersPerBatchNotInteger: return "servers_per_batch_not_integer";
    case ParameterViolation::kRowsPerServerNotInteger: return "rows_per_server_not_integer";
    case ParameterViolation::kPartitionsNotDividingSourceRows: return "partitions_not_dividing_source_rows";
    case ParameterViolation::kPartitionsNotDividingCodedRows: return "partitions_not_dividing_coded_rows";
    case ParameterViolation::kBatchSizeNotInteger: return "batch_size_not_integer";
    case ParameterViolation::kFinishersNotDividingVectors: return "finishers_not_dividing_vectors";
    case ParameterViolation::kCodedRowsBelowSourceRows: return "coded_rows_below_source_rows";
  }
  return "unknown";
}

ParameterError::ParameterError(ParameterViolation violation, const std::string& detail)
    : std::invalid_argument(std::string(to_string(violation)) + ": " + detail),
      violation_(violation) {}

namespace {

Count exact_integer(const Rational& value, ParameterViolation violation, const std::string& what) {
  if (denominator(value) != 1) {
    throw ParameterError(violation, what + " = " + format_rational(value) + " is not an integer");
  }
  return numerator(value).convert_to<Count>();
}

}  // namespace

SystemParameters validate_parameters(const RawParameters& raw) {
  if (raw.source_rows <= 0 || raw.columns <= 0 || raw.vectors <= 0 || raw.servers <= 0 ||
      raw.coded_rows <= 0 || raw.partitions <= 0 || raw.storage <= 0) {
    throw ParameterError(ParameterViolation::kNonPositive, "all parameters must be positive");
  }
  if (raw.storage < Rational(1, raw.servers) || raw.storage > 1) {
    throw ParameterError(ParameterViolation::kStorageOutOfRange,
                         "storage " + format_rational(raw.storage) + " outside [1/K, 1]");
  }
  if (raw.coded_rows < raw.source_rows) {
    throw ParameterError(ParameterViolation::kCodedRowsBelowSourceRows, "r < m");
  }

  SystemParameters p;
  p.source_rows = raw.source_rows;
  p.columns = raw.columns;
  p.vectors = raw.vectors;
  p.servers = raw.servers;
  p.storage = raw.storage;
  p.coded_rows = raw.coded_rows;
  p.partitions = raw.partitions;

  p.finishers = exact_integer(Rational(checked_mul(raw.servers, raw.source_rows), raw.coded_rows),
                              ParameterViolation::kFinishersNotInteger, "K*m/r");
  p.servers_per_batch = exact_integer(raw.storage * p.finishers,
                                      ParameterViolation::kServersPerBatchNotInteger, "mu*q");
  p.rows_per_server = exact_integer(raw.storage * raw.source_rows,
                                    ParameterViolation::kRowsPerServerNotInteger, "mu*m");
  if (p.servers_per_batch < 1) {
    throw ParameterError(ParameterViolation::kServersPerBatchNotInteger, "mu*q must be positive");
  }
  if (raw.source_rows % raw.partitions != 0) {
    throw ParameterError(ParameterViolation::kPartitionsNotDividingSourceRows,
                         "T=" + std::to_string(raw.partitions) + " does not divide m=" +
                             std::to_string(raw.source_rows));
  }
  if (raw.coded_rows % raw.partitions != 0) {
    throw ParameterError(ParameterViolation::kPartitionsNotDividingCodedRows,
                         "T=" + std::to_string(raw.partitions) + " does not divide r=" +
                             std::to_string(raw.coded_rows));
  }
  p.batch_count = binomial(p.servers, p.servers_per_batch);
  if (raw.coded_rows % p.batch_count != 0) {
    throw ParameterError(ParameterViolation::kBatchSizeNotInteger,
                         "r=" + std::to_string(raw.coded_rows) + " is not a multiple of " +
                             std::to_string(p.batch_count) + " batches");
  }
  p.batch_size = raw.coded_rows / p.batch_count;
  if (raw.vectors % p.finishers != 0) {
    throw ParameterError(ParameterViolation::kFinishersNotDividingVectors,
                         "q=" + std::to_string(p.finishers) + " does not divide N=" +
                             std::to_string(raw.vectors));
  }
  p.vectors_per_finisher = raw.vectors / p.finishers;
  p.rows_per_partition = raw.coded_rows / raw.partitions;
  p.decode_threshold = raw.source_rows / raw.partitions;
  return p;
}

RawParameters SystemParameters::raw() const {
  return RawParameters{source_rows, columns, vectors, servers, storage, coded_rows, partitions};
}

SystemParameters SystemParameters::with_partitions(Count new_partitions) const {
  RawParameters r = raw();
  r.partitions = new_partitions;
  return validate_parameters(r);
}

}  // namespace bdcode
