#include "eln/engine.hpp"

#include "eln/error.hpp"

namespace eln {

std::unique_ptr<StampBackend> make_backend(const StampSettings& s) {
    if (s.backend == "http") {
        if (s.url.empty()) throw Error(ErrorCode::config, "http stamp backend needs a url");
        return std::make_unique<HttpStampBackend>(s.url, s.key);
    }
    return std::make_unique<MockStampBackend>();
}

Engine::Engine(Config config) : Engine(config, make_backend(config.stamp)) {}

Engine::Engine(Config config, std::unique_ptr<StampBackend> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {
    if (config_.store_path.has_parent_path()) {
        std::filesystem::create_directories(config_.store_path.parent_path());
    }
    catalog_ = std::make_unique<Catalog>(config_.store_path);
    linker_ = std::make_unique<Linker>(*catalog_, config_.link);
    ingestor_ = std::make_unique<Ingestor>(*catalog_, *linker_,
                                           IngestOptions{config_.grammars, config_.profiles});
    RetryPolicy retry;
    retry.max_attempts = config_.stamp.max_attempts;
    retry.initial_delay = config_.stamp.initial_backoff;
    stamper_ = std::make_unique<Stamper>(*catalog_, config_.data_root, *backend_, retry);
}

IngestReport Engine::ingest(std::optional<Timestamp> now, std::optional<bool> recency_enabled) {
    RecencyPolicy policy = config_.recency;
    if (recency_enabled) policy.enabled = *recency_enabled;
    return ingestor_->generate_entries(config_.data_root, policy, now.value_or(now_local()));
}

Note Engine::add_note(const std::string& sample, Timestamp written_at, const std::string& body) {
    return catalog_->write([&] {
        auto note = catalog_->add_note(sample, written_at, body);
        linker_->auto_link_note(note);
        return note;
    });
}

PlotPayload Engine::plot(EntryId id) const {
    return plot_payload(*catalog_, config_.data_root, id, config_.tabular);
}

}  // namespace eln
