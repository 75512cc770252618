#include "eln/linker.hpp"

#include <algorithm>
#include <map>

#include "eln/error.hpp"

namespace eln {

namespace {

Seconds distance(Timestamp a, Timestamp b) { return a > b ? a - b : b - a; }

}  // namespace

std::optional<EntryId> nearest_main(const CatalogEntry& sub,
                                    const std::vector<CatalogEntry>& mains,
                                    const SubWindow& window) {
    const CatalogEntry* best = nullptr;
    for (const auto& m : mains) {
        if (m.kind != TreeKind::main || m.sample_name != sub.sample_name) continue;
        if (sub.observed_at < m.observed_at - window.pre ||
            sub.observed_at > m.observed_at + window.post) {
            continue;
        }
        if (!best) {
            best = &m;
            continue;
        }
        auto d = distance(sub.observed_at, m.observed_at);
        auto bd = distance(sub.observed_at, best->observed_at);
        if (d < bd || (d == bd && (m.observed_at < best->observed_at ||
                                   (m.observed_at == best->observed_at && m.id < best->id)))) {
            best = &m;
        }
    }
    if (!best) return std::nullopt;
    return best->id;
}

Timestamp HistoryItem::at() const {
    return std::visit(
        [](const auto& x) {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Note>) {
                return x.written_at;
            } else {
                return x.observed_at;
            }
        },
        item);
}

EntryId HistoryItem::id() const {
    return std::visit([](const auto& x) { return x.id; }, item);
}

Linker::Linker(Catalog& catalog, LinkWindows windows) : catalog_(catalog), windows_(windows) {}

std::vector<Link> Linker::settle_sub(const CatalogEntry& sub) {
    // A main can only claim the sub if sub.t lies in [m.t - pre, m.t + post],
    // i.e. m.t lies in [sub.t - post, sub.t + pre].
    EntryFilter f;
    f.sample = sub.sample_name;
    f.kind = TreeKind::main;
    f.from = sub.observed_at - windows_.sub.post;
    f.to = sub.observed_at + windows_.sub.pre;
    auto mains = catalog_.query_entries(f);
    auto best = nearest_main(sub, mains, windows_.sub);

    std::vector<Link> created;
    bool have_best = false;
    for (const auto& l : catalog_.links_to(sub.id, LinkType::main_sub)) {
        if (l.created_by != LinkOrigin::automatic) {
            if (best && l.from_id == *best) have_best = true;
            continue;
        }
        if (best && l.from_id == *best) {
            have_best = true;
        } else {
            catalog_.remove_link(l.id);
        }
    }
    if (best && !have_best) {
        created.push_back(
            catalog_.add_link(*best, sub.id, LinkType::main_sub, LinkOrigin::automatic));
    }
    return created;
}

std::vector<Link> Linker::auto_link_subs(const CatalogEntry& main) {
    if (main.kind != TreeKind::main) {
        throw Error(ErrorCode::invalid_argument,
                    "entry " + std::to_string(main.id) + " is not a main entry");
    }
    return catalog_.write([&] {
        EntryFilter f;
        f.sample = main.sample_name;
        f.kind = TreeKind::sub;
        f.from = main.observed_at - windows_.sub.pre;
        f.to = main.observed_at + windows_.sub.post;
        std::vector<Link> created;
        for (const auto& sub : catalog_.query_entries(f)) {
            auto links = settle_sub(sub);
            created.insert(created.end(), links.begin(), links.end());
        }
        return created;
    });
}

std::vector<Link> Linker::auto_link_sub(const CatalogEntry& sub) {
    if (sub.kind != TreeKind::sub) {
        throw Error(ErrorCode::invalid_argument,
                    "entry " + std::to_string(sub.id) + " is not a sub entry");
    }
    return catalog_.write([&] { return settle_sub(sub); });
}

std::vector<Link> Linker::auto_link_notes(const CatalogEntry& entry) {
    return catalog_.write([&] {
        std::vector<Link> created;
        auto existing = catalog_.links_from(entry.id, LinkType::entry_note);
        for (const auto& n : catalog_.notes_for_sample(entry.sample_name)) {
            if (distance(n.written_at, entry.observed_at) > windows_.note) continue;
            bool linked = std::any_of(existing.begin(), existing.end(),
                                      [&](const Link& l) { return l.to_id == n.id; });
            if (!linked) {
                created.push_back(catalog_.add_link(entry.id, n.id, LinkType::entry_note,
                                                    LinkOrigin::automatic));
            }
        }
        return created;
    });
}

std::vector<Link> Linker::auto_link_note(const Note& note) {
    return catalog_.write([&] {
        EntryFilter f;
        f.sample = note.sample_name;
        f.from = note.written_at - windows_.note;
        f.to = note.written_at + windows_.note;
        std::vector<Link> created;
        auto existing = catalog_.links_to(note.id, LinkType::entry_note);
        for (const auto& e : catalog_.query_entries(f)) {
            bool linked = std::any_of(existing.begin(), existing.end(),
                                      [&](const Link& l) { return l.from_id == e.id; });
            if (!linked) {
                created.push_back(catalog_.add_link(e.id, note.id, LinkType::entry_note,
                                                    LinkOrigin::automatic));
            }
        }
        return created;
    });
}

std::vector<Link> Linker::link_new_entries(const std::vector<CatalogEntry>& entries) {
    return catalog_.write([&] {
        std::map<EntryId, CatalogEntry> subs;
        for (const auto& e : entries) {
            if (e.kind == TreeKind::sub) {
                subs.emplace(e.id, e);
                continue;
            }
            EntryFilter f;
            f.sample = e.sample_name;
            f.kind = TreeKind::sub;
            f.from = e.observed_at - windows_.sub.pre;
            f.to = e.observed_at + windows_.sub.post;
            for (auto& s : catalog_.query_entries(f)) subs.emplace(s.id, std::move(s));
        }
        std::vector<Link> created;
        for (const auto& [id, sub] : subs) {
            auto links = settle_sub(sub);
            created.insert(created.end(), links.begin(), links.end());
        }
        for (const auto& e : entries) {
            auto links = auto_link_notes(e);
            created.insert(created.end(), links.begin(), links.end());
        }
        return created;
    });
}

std::vector<HistoryItem> Linker::sample_history(const std::string& sample_name) const {
    if (!catalog_.find_sample(sample_name)) {
        throw Error(ErrorCode::unknown_sample, "unknown sample " + sample_name);
    }
    EntryFilter f;
    f.sample = sample_name;
    std::vector<HistoryItem> out;
    for (auto& e : catalog_.query_entries(f)) out.push_back({std::move(e)});
    for (auto& n : catalog_.notes_for_sample(sample_name)) out.push_back({std::move(n)});
    std::stable_sort(out.begin(), out.end(), [](const HistoryItem& a, const HistoryItem& b) {
        if (a.at() != b.at()) return a.at() < b.at();
        return a.id() < b.id();
    });
    return out;
}

}  // namespace eln
