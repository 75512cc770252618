#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "eln/catalog.hpp"

namespace eln {

struct SubWindow {
    Seconds pre{0};
    Seconds post{std::chrono::hours{2}};
};

struct LinkWindows {
    SubWindow sub;
    Seconds note{std::chrono::hours{12}};
};

// Nearest main among `mains` whose window contains `sub` (same sample);
// ties go to the earlier main, then the lower id.
std::optional<EntryId> nearest_main(const CatalogEntry& sub,
                                    const std::vector<CatalogEntry>& mains,
                                    const SubWindow& window);

struct HistoryItem {
    std::variant<CatalogEntry, Note> item;

    Timestamp at() const;
    EntryId id() const;
};

class Linker {
public:
    Linker(Catalog& catalog, LinkWindows windows = {});

    const LinkWindows& windows() const { return windows_; }

    // Links every same-sample sub inside the main's window, unless that sub
    // has a nearer eligible main. Returns the links created by this call.
    std::vector<Link> auto_link_subs(const CatalogEntry& main);

    // Attaches a sub entry to its nearest eligible main.
    std::vector<Link> auto_link_sub(const CatalogEntry& sub);

    // Links notes of the same sample written within the note window.
    std::vector<Link> auto_link_notes(const CatalogEntry& entry);

    // Links a freshly written note to every entry within the note window.
    std::vector<Link> auto_link_note(const Note& note);

    // Same end state as calling auto_link_subs / auto_link_sub and
    // auto_link_notes per entry, but every affected sub is settled once.
    std::vector<Link> link_new_entries(const std::vector<CatalogEntry>& entries);

    // Entries and notes of one sample, ascending by time then id.
    // Throws Error{unknown_sample}.
    std::vector<HistoryItem> sample_history(const std::string& sample_name) const;

private:
    std::vector<Link> settle_sub(const CatalogEntry& sub);

    Catalog& catalog_;
    LinkWindows windows_;
};

}  // namespace eln
