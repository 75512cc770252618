#pragma once

#include <json.hpp>

#include "eln/catalog.hpp"
#include "eln/ingest.hpp"
#include "eln/linker.hpp"
#include "eln/merkle.hpp"
#include "eln/tabular.hpp"

namespace eln {

using Json = nlohmann::json;

Json to_json(const ParsedFileMeta& meta);
Json to_json(const CatalogEntry& entry);
Json to_json(const std::vector<CatalogEntry>& entries);
Json to_json(const Sample& sample);
Json to_json(const PathRule& rule);
Json to_json(const PathRuleSet& rules);
Json to_json(const Note& note);
Json to_json(const Link& link);
Json to_json(const std::vector<Link>& links);
Json to_json(const HistoryItem& item);
Json to_json(const std::vector<HistoryItem>& items);
Json to_json(const IngestReport& report);
Json to_json(const TimeSeriesTable& table);
Json to_json(const PlotPayload& payload);
Json to_json(const StampBatch& batch);
Json to_json(const StampProof& proof);

// Throws Error{invalid_argument} on malformed input.
IngestReport report_from_json(const Json& j);
PathRule rule_from_json(const Json& j);

// Throws Error{invalid_proof} when the document is not a well-formed proof.
StampProof proof_from_json(const Json& j);

}  // namespace eln
