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

#include "bdcode/design_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bdcode {

ParseError::ParseError(Count line, std::string field, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", field '" + field + "': " + message),
      line_(line), field_(std::move(field)) {}

namespace {

Count parse_count(const std::string& text, Count line, const std::string& field) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError(line, field, "expected an integer, got '" + text + "'");
  }
}

std::vector<Count> parse_label(const std::string& text, Count line) {
  std::vector<Count> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_count(item, line, "label"));
  return out;
}

bool is_content(const std::string& line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos != std::string::npos && line[pos] != '#';
}

}  // namespace

std::string format_parameters(const RawParameters& raw) {
  std::ostringstream os;
  os << "m=" << raw.source_rows << " n=" << raw.columns << " N=" << raw.vectors
     << " K=" << raw.servers << " r=" << raw.coded_rows << " T=" << raw.partitions
     << " mu=" << format_rational(raw.storage);
  return os.str();
}

RawParameters parse_parameters(const std::string& text, Count line) {
  RawParameters raw;
  std::istringstream ss(text);
  std::string token;
  while (ss >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos) throw ParseError(line, token, "expected key=value");
    std::string key = token.substr(0, eq);
    std::string value = token.substr(eq + 1);
    if (key == "mu") {
      try {
        raw.storage = parse_rational(value);
      } catch (const std::invalid_argument& e) {
        throw ParseError(line, key, e.what());
      }
    } else if (key == "m") {
      raw.source_rows = parse_count(value, line, key);
    } else if (key == "n") {
      raw.columns = parse_count(value, line, key);
    } else if (key == "N") {
      raw.vectors = parse_count(value, line, key);
    } else if (key == "K") {
      raw.servers = parse_count(value, line, key);
    } else if (key == "r") {
      raw.coded_rows = parse_count(value, line, key);
    } else if (key == "T") {
      raw.partitions = parse_count(value, line, key);
    } else {
      throw ParseError(line, key, "unknown parameter");
    }
  }
  return raw;
}

void write_design_text(std::ostream& os, const StorageDesign& design, const std::string& note) {
  const auto& P = design.assignment();
  os << "# bdcode design\n";
  if (!note.empty()) os << "# " << note << '\n';
  os << format_parameters(design.params().raw()) << '\n';
  for (Count i = 0; i < P.batches(); ++i) {
    os << i + 1 << ' ' << format_servers(design.label_mask(i));
    for (Count t = 0; t < P.partitions(); ++t) os << ' ' << P.at(i, t);
    os << '\n';
  }
}

StorageDesign read_design_text(std::istream& is) {
  std::string line;
  Count line_no = 0;
  bool have_header = false;
  SystemParameters params;
  std::vector<BatchLabel> labels;
  AssignmentMatrix matrix;
  Count next_batch = 0;

  while (std::getline(is, line)) {
    ++line_no;
    if (!is_content(line)) continue;
    if (!have_header) {
      params = validate_parameters(parse_parameters(line, line_no));
      labels = enumerate_batch_labels(params.servers, params.servers_per_batch);
      matrix = AssignmentMatrix(params.batch_count, params.partitions);
      have_header = true;
      continue;
    }
    std::istringstream ss(line);
    std::string index_text, label_text;
    if (!(ss >> index_text >> label_text)) {
      throw ParseError(line_no, "batch", "expected '<index> <label> <entries>'");
    }
    Count index = parse_count(index_text, line_no, "index");
    if (next_batch >= params.batch_count) {
      throw ParseError(line_no, "index", "more batch lines than the " +
                                             std::to_string(params.batch_count) + " batches");
    }
    if (index != next_batch + 1) {
      throw ParseError(line_no, "index", "expected batch " + std::to_string(next_batch + 1));
    }
    auto label = parse_label(label_text, line_no);
    if (label != labels[static_cast<std::size_t>(next_batch)].servers()) {
      throw ParseError(line_no, "label", "label '" + label_text + "' is not the lexicographic label " +
                                             format_servers(labels[static_cast<std::size_t>(next_batch)].mask()));
    }
    std::string entry;
    Count t = 0;
    while (ss >> entry) {
      if (t >= params.partitions) throw ParseError(line_no, "entries", "too many entries");
      matrix.at(next_batch, t) = parse_count(entry, line_no, "p[" + std::to_string(t + 1) + "]");
      ++t;
    }
    if (t != params.partitions) {
      throw ParseError(line_no, "entries",
                       "expected " + std::to_string(params.partitions) + " entries, got " +
                           std::to_string(t));
    }
    ++next_batch;
  }
  if (!have_header) throw ParseError(line_no, "header", "missing parameter header");
  if (next_batch != params.batch_count) {
    throw ParseError(line_no, "batch", "expected " + std::to_string(params.batch_count) +
                                           " batch lines, got " + std::to_string(next_batch));
  }
  return StorageDesign(params, std::move(matrix));
}

std::string design_to_json(const StorageDesign& design, const std::string& note) {
  using nlohmann::json;
  const auto& p = design.params();
  const auto& P = design.assignment();
  json doc;
  doc["format"] = "bdcode-design";
  if (!note.empty()) doc["note"] = note;
  doc["params"] = {{"m", p.source_rows}, {"n", p.columns},     {"N", p.vectors},
                   {"K", p.servers},     {"r", p.coded_rows}, {"T", p.partitions},
                   {"mu", format_rational(p.storage)}};
  json batches = json::array();
  for (Count i = 0; i < P.batches(); ++i) {
    std::vector<Count> row(static_cast<std::size_t>(P.partitions()));
    for (Count t = 0; t < P.partitions(); ++t) row[static_cast<std::size_t>(t)] = P.at(i, t);
    batches.push_back({{"index", i + 1},
                       {"label", design.labels()[static_cast<std::size_t>(i)].servers()},
                       {"rows", row}});
  }
  doc["batches"] = std::move(batches);
  return doc.dump(1);
}

StorageDesign design_from_json(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, "json", e.what());
  }
  try {
    const auto& jp = doc.at("params");
    RawParameters raw;
    raw.source_rows = jp.at("m").get<Count>();
    raw.columns = jp.at("n").get<Count>();
    raw.vectors = jp.at("N").get<Count>();
    raw.servers = jp.at("K").get<Count>();
    raw.coded_rows = jp.at("r").get<Count>();
    raw.partitions = jp.at("T").get<Count>();
    raw.storage = parse_rational(jp.at("mu").get<std::string>());
    SystemParameters params = validate_parameters(raw);
    auto labels = enumerate_batch_labels(params.servers, params.servers_per_batch);

    const auto& jb = doc.at("batches");
    if (static_cast<Count>(jb.size()) != params.batch_count) {
      throw ParseError(0, "batches", "expected " + std::to_string(params.batch_count) + " batches");
    }
    AssignmentMatrix matrix(params.batch_count, params.partitions);
    for (Count i = 0; i < params.batch_count; ++i) {
      const auto& b = jb[static_cast<std::size_t>(i)];
      const std::string where = "batches[" + std::to_string(i) + "]";
      if (b.at("index").get<Count>() != i + 1) throw ParseError(0, where + ".index", "out of order");
      if (b.at("label").get<std::vector<Count>>() != labels[static_cast<std::size_t>(i)].servers()) {
        throw ParseError(0, where + ".label", "not the lexicographic label");
      }
      auto row = b.at("rows").get<std::vector<Count>>();
      if (static_cast<Count>(row.size()) != params.partitions) {
        throw ParseError(0, where + ".rows", "wrong number of entries");
      }
      for (Count t = 0; t < params.partitions; ++t) matrix.at(i, t) = row[static_cast<std::size_t>(t)];
    }
    return StorageDesign(params, std::move(matrix));
  } catch (const json::exception& e) {
    throw ParseError(0, "json", e.what());
  }
}

void save_design(const std::filesystem::path& path, const StorageDesign& design,
                 const std::string& note) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if (path.extension() == ".json") {
    out << design_to_json(design, note) << '\n';
  } else {
    write_design_text(out, design, note);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

StorageDesign load_design(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  auto pos = text.find_first_not_of(" \t\r\n");
  if (pos != std::string::npos && text[pos] == '{') return design_from_json(text);
  std::istringstream ss(text);
  return read_design_text(ss);
}

}  // namespace bdcode
