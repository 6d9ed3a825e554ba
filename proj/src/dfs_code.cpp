// Copyright 2026 The graphtune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "graphtune/dfs_code.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "graphtune/error.hpp"

namespace graphtune {

namespace {

using Kind = InvalidCodeError::Kind;

std::vector<NodeId> visit_order(const Graph& g, NodeId u) {
  std::vector<NodeId> order = g.neighbors(u);
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
    return a < b;
  });
  return order;
}

}  // namespace

DfsCode encode(const Graph& g) {
  if (g.edge_count() == 0) throw NotEncodableError("graph has no edges");
  if (!g.is_connected()) throw NotEncodableError("graph is not connected");

  const int n = g.node_count();
  NodeId start = 0;
  for (NodeId u = 1; u < n; ++u) {
    if (g.degree(u) > g.degree(start)) start = u;
  }

  std::vector<int> time(n, -1);
  int next_time = 0;
  time[start] = next_time++;

  DfsCode code;
  code.reserve(g.edge_count());

  struct Frame {
    NodeId node;
    std::vector<NodeId> order;
    std::size_t next = 0;
  };
  std::vector<Frame> stack;
  stack.push_back({start, visit_order(g, start)});

  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next == top.order.size()) {
      stack.pop_back();
      continue;
    }
    const NodeId parent = top.node;
    const NodeId v = top.order[top.next++];
    if (time[v] >= 0) continue;
    time[v] = next_time++;
    code.push_back({time[parent], time[v]});

    std::vector<int> closing;
    for (NodeId w : g.neighbors(v)) {
      if (w != parent && time[w] >= 0) closing.push_back(time[w]);
    }
    std::sort(closing.begin(), closing.end());
    for (int t : closing) code.push_back({time[v], t});

    stack.push_back({v, visit_order(g, v)});
  }
  return code;
}

void validate(const DfsCode& code) {
  if (code.empty()) throw InvalidCodeError(Kind::kEmpty, 0, "empty code");
  std::set<std::pair<int, int>> seen;
  int max_time = -1;
  for (std::size_t i = 0; i < code.size(); ++i) {
    const DfsEdge& e = code[i];
    for (int label : {e.from_label, e.edge_label, e.to_label}) {
      if (label < 0 || label >= kLabelSymbols) {
        throw InvalidCodeError(Kind::kBadLabel, i,
                               "label " + std::to_string(label) + " outside the alphabet");
      }
    }
    if (e.from_time < 0 || e.to_time < 0) {
      throw InvalidCodeError(Kind::kTimestampGap, i, "negative timestamp");
    }
    if (i == 0) {
      if (e.from_time != 0 || e.to_time != 1) {
        throw InvalidCodeError(Kind::kBadStart, i,
                               "first edge must be (0, 1)");
      }
      max_time = 1;
    } else if (e.from_time == e.to_time) {
      throw InvalidCodeError(Kind::kSelfLoop, i, "self-loop");
    } else if (seen.contains(std::minmax(e.from_time, e.to_time))) {
      throw InvalidCodeError(Kind::kDuplicateEdge, i, "duplicate edge");
    } else if (e.is_forward()) {
      if (e.to_time != max_time + 1 || e.from_time > max_time) {
        throw InvalidCodeError(
            Kind::kTimestampGap, i,
            "forward edge must introduce timestamp " +
                std::to_string(max_time + 1) + " from a seen node");
      }
      max_time = e.to_time;
    } else {
      if (e.from_time > max_time) {
        throw InvalidCodeError(Kind::kDanglingBackward, i,
                               "backward edge from unseen timestamp " +
                                   std::to_string(e.from_time));
      }
      if (e.from_time != max_time) {
        throw InvalidCodeError(
            Kind::kNotAtFrontier, i,
            "backward edge must start at current position " +
                std::to_string(max_time));
      }
    }
    seen.insert(std::minmax(e.from_time, e.to_time));
  }
}

Graph decode(const DfsCode& code) {
  validate(code);
  int max_time = 0;
  for (const auto& e : code) max_time = std::max({max_time, e.from_time, e.to_time});
  Graph g(max_time + 1);
  for (const auto& e : code) g.add_edge(e.from_time, e.to_time);
  return g;
}

std::string to_text(const DfsCode& code) {
  std::ostringstream out;
  for (const auto& e : code) {
    out << e.from_time << ' ' << e.to_time << ' ' << e.from_label << ' '
        << e.edge_label << ' ' << e.to_label << '\n';
  }
  return out.str();
}

DfsCode parse_code_text(std::string_view text) {
  DfsCode code;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    DfsEdge e;
    std::string extra;
    if (!(fields >> e.from_time >> e.to_time >> e.from_label >> e.edge_label >>
          e.to_label) ||
        (fields >> extra)) {
      throw FormatError("code text line " + std::to_string(line_no) +
                        ": expected 5 integers");
    }
    code.push_back(e);
  }
  return code;
}

VocabSizes token_vocab_sizes(int max_nodes) {
  return {max_nodes + 1, max_nodes + 1, kLabelSymbols + 1, kLabelSymbols + 1,
          kLabelSymbols + 1};
}

TokenStep end_step(int max_nodes) {
  TokenStep step;
  const auto vocab = token_vocab_sizes(max_nodes);
  for (int s = 0; s < kTokenSlots; ++s) step[s] = vocab[s] - 1;
  return step;
}

bool is_end_step(const TokenStep& step, int max_nodes) {
  const auto vocab = token_vocab_sizes(max_nodes);
  for (int s = 0; s < kTokenSlots; ++s) {
    if (step[s] == vocab[s] - 1) return true;
  }
  return false;
}

TokenSequence to_tokens(const DfsCode& code, int max_nodes) {
  TokenSequence seq;
  seq.max_nodes = max_nodes;
  seq.steps.reserve(code.size() + 1);
  for (const auto& e : code) {
    if (e.from_time >= max_nodes || e.to_time >= max_nodes) {
      throw CapacityError("timestamp " +
                          std::to_string(std::max(e.from_time, e.to_time)) +
                          " does not fit max_nodes=" +
                          std::to_string(max_nodes));
    }
    if (e.from_label >= kLabelSymbols || e.edge_label >= kLabelSymbols ||
        e.to_label >= kLabelSymbols) {
      throw CapacityError("label symbol outside the token vocabulary");
    }
    seq.steps.push_back(
        {e.from_time, e.to_time, e.from_label, e.edge_label, e.to_label});
  }
  seq.steps.push_back(end_step(max_nodes));
  return seq;
}

DfsCode from_tokens(const TokenSequence& seq) {
  const auto vocab = token_vocab_sizes(seq.max_nodes);
  DfsCode code;
  for (std::size_t i = 0; i < seq.steps.size(); ++i) {
    const TokenStep& step = seq.steps[i];
    if (is_end_step(step, seq.max_nodes)) break;
    for (int s = 0; s < kTokenSlots; ++s) {
      if (step[s] < 0 || step[s] >= vocab[s]) {
        throw InvalidCodeError(Kind::kBadToken, i,
                               "token out of range in slot " + std::to_string(s));
      }
    }
    code.push_back({step[kFromTime], step[kToTime], step[kFromLabel],
                    step[kEdgeLabel], step[kToLabel]});
  }
  validate(code);
  return code;
}

}  // namespace graphtune
