#pragma once

#include <memory>
#include <optional>

#include "eln/catalog.hpp"
#include "eln/config.hpp"
#include "eln/ingest.hpp"
#include "eln/linker.hpp"
#include "eln/stamper.hpp"
#include "eln/tabular.hpp"

namespace eln {

// Wires the catalog, linker, ingestor and stamper from one Config.
class Engine {
public:
    explicit Engine(Config config);
    Engine(Config config, std::unique_ptr<StampBackend> backend);

    const Config& config() const { return config_; }
    Catalog& catalog() { return *catalog_; }
    Linker& linker() { return *linker_; }
    Ingestor& ingestor() { return *ingestor_; }
    Stamper& stamper() { return *stamper_; }
    StampBackend& backend() { return *backend_; }

    IngestReport ingest(std::optional<Timestamp> now = std::nullopt,
                        std::optional<bool> recency_enabled = std::nullopt);

    // Stores the note and links it to entries inside the note window.
    Note add_note(const std::string& sample, Timestamp written_at, const std::string& body);

    PlotPayload plot(EntryId id) const;

private:
    Config config_;
    std::unique_ptr<Catalog> catalog_;
    std::unique_ptr<StampBackend> backend_;
    std::unique_ptr<Linker> linker_;
    std::unique_ptr<Ingestor> ingestor_;
    std::unique_ptr<Stamper> stamper_;
};

std::unique_ptr<StampBackend> make_backend(const StampSettings& settings);

}  // namespace eln
