#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wikimpact/pipeline.hpp"

namespace wikimpact {

/// CSV with the header rank,subject_id,label,score; scores with 6 decimals.
void write_ranking_csv(std::ostream& out, const std::vector<RankedScore>& ranking);

/// JSON array of {rank, subject_id, label, score} objects.
void write_ranking_json(std::ostream& out, const std::vector<RankedScore>& ranking);

/// Aligned, human-readable table.
void write_ranking_console(std::ostream& out, const std::vector<RankedScore>& ranking);

/// All rankings of a run. A single ranking is written as-is; several are
/// written as "# <measure>" sections (CSV, console) or as one JSON object
/// keyed by measure name.
void write_rankings(std::ostream& out, const std::vector<MeasureRanking>& rankings, OutputFormat format);

void write_report(std::ostream& out, const RunReport& report);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

}  // namespace wikimpact
