#pragma once

#include "cupgame/game.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cupgame {

/// First line of a JSONL trace.
struct TraceHeader {
  GameConfig config;
  std::string filler;
  std::string emptier;
  std::uint64_t trial = 0;
  InitialFills initial;
};

struct TraceFile {
  TraceHeader header;
  std::vector<StepRecord> records;
};

/// Unit counts are JSON integers when they fit in 64 bits and decimal
/// strings otherwise. phi is written only when present.
void write_trace_header(std::ostream& out, const TraceHeader& header);
void write_trace_record(std::ostream& out, const StepRecord& rec);

/// Throws ConfigError on malformed input.
TraceFile read_trace(std::istream& in);
TraceFile read_trace_file(const std::string& path);

}  // namespace cupgame
