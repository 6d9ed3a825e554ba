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

#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "graphtune/graph.hpp"

namespace graphtune {

/// Label symbol carried by every node and edge of an unlabeled graph.
inline constexpr int kUnlabeled = 0;
/// Distinct label symbols the token format reserves (excluding end-of-sequence).
inline constexpr int kLabelSymbols = 1;

/// One edge tuple of a DFS code: discovery timestamps of both endpoints plus
/// node/edge/node labels.
struct DfsEdge {
  int from_time = 0;
  int to_time = 0;
  int from_label = kUnlabeled;
  int edge_label = kUnlabeled;
  int to_label = kUnlabeled;

  bool is_forward() const { return from_time < to_time; }
  friend bool operator==(const DfsEdge&, const DfsEdge&) = default;
};

using DfsCode = std::vector<DfsEdge>;

/// DFS code of a connected graph with at least one edge. The traversal starts
/// at the highest-degree node (smallest id on ties) and visits unvisited
/// neighbors by descending degree, then ascending id. Non-tree edges are
/// emitted as backward edges on arrival at the node that closes them, in
/// ascending target timestamp, before any forward edge leaves that node.
DfsCode encode(const Graph& g);

/// Checks the code invariants; throws InvalidCodeError at the first violation.
void validate(const DfsCode& code);

/// Graph on the code's timestamps. Validates first.
Graph decode(const DfsCode& code);

/// "t_u t_v l_u l_e l_v" per line.
std::string to_text(const DfsCode& code);
DfsCode parse_code_text(std::string_view text);

// ---------------------------------------------------------------------------
// Token form.

inline constexpr int kTokenSlots = 5;
enum Slot : int {
  kFromTime = 0,
  kToTime = 1,
  kFromLabel = 2,
  kEdgeLabel = 3,
  kToLabel = 4
};

using TokenStep = std::array<int, kTokenSlots>;
using VocabSizes = std::array<int, kTokenSlots>;

/// Timestamp slots hold 0..max_nodes-1 plus the end symbol; label slots hold
/// the label symbols plus the end symbol. The end symbol is the last index.
VocabSizes token_vocab_sizes(int max_nodes);

struct TokenSequence {
  int max_nodes = 0;
  /// One step per edge followed by a terminal end-of-sequence step.
  std::vector<TokenStep> steps;

  std::size_t size() const { return steps.size(); }
  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

TokenStep end_step(int max_nodes);
/// A step terminates the sequence when any slot holds its end symbol. Slots
/// are sampled independently, so they need not agree on where to stop.
bool is_end_step(const TokenStep& step, int max_nodes);

/// Throws CapacityError if a timestamp does not fit max_nodes.
TokenSequence to_tokens(const DfsCode& code, int max_nodes);

/// Truncates at the first end step, maps back and validates. This is the
/// acceptance test for generated sequences.
DfsCode from_tokens(const TokenSequence& seq);

}  // namespace graphtune
