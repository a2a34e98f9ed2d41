#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "popbias/error.hpp"

namespace popbias {

/// Dense index into an IdTable.
using Index = std::uint32_t;

inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 10;

/// Sorted, de-duplicated identifier table. Index order equals ascending
/// lexicographic order of the identifiers.
class IdTable {
public:
    IdTable() = default;

    explicit IdTable(std::vector<std::string> ids) : names_(std::move(ids)) {
        std::sort(names_.begin(), names_.end());
        names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
    }

    std::size_t size() const noexcept { return names_.size(); }
    const std::string& name(Index i) const { return names_.at(i); }
    std::span<const std::string> names() const noexcept { return names_; }

    std::optional<Index> find(std::string_view id) const {
        auto it = std::lower_bound(names_.begin(), names_.end(), id);
        if (it == names_.end() || *it != id) return std::nullopt;
        return static_cast<Index>(it - names_.begin());
    }

    Index at(std::string_view id) const {
        if (auto i = find(id)) return *i;
        throw UnknownIdError("unknown id '" + std::string(id) + "'");
    }

private:
    std::vector<std::string> names_;
};

struct Interaction {
    Index user = 0;
    Index item = 0;
    friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

struct RatingTriple {
    Index user = 0;
    Index item = 0;
    int rating = 0;
    friend bool operator==(const RatingTriple&, const RatingTriple&) = default;
};

namespace detail {

template <class T>
void sort_and_check_unique(std::vector<T>& rows, const IdTable& users, const IdTable& items) {
    std::sort(rows.begin(), rows.end(), [](const T& a, const T& b) {
        return std::tie(a.user, a.item) < std::tie(b.user, b.item);
    });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].user == rows[i - 1].user && rows[i].item == rows[i - 1].item)
            throw InputError("duplicate (user, item) pair (" + users.name(rows[i].user) + ", " +
                             items.name(rows[i].item) + ")");
    }
}

template <class T>
void check_indices(std::span<const T> rows, const IdTable& users, const IdTable& items) {
    for (const auto& r : rows)
        if (r.user >= users.size() || r.item >= items.size())
            throw InputError("interaction refers to an index outside the id tables");
}

} // namespace detail

/// Who consumed what, without ratings. Every user and every item in the id
/// tables appears in at least one interaction.
class InteractionSkeleton {
public:
    InteractionSkeleton() = default;

    InteractionSkeleton(std::shared_ptr<const IdTable> users, std::shared_ptr<const IdTable> items,
                        std::vector<Interaction> pairs)
        : users_(std::move(users)), items_(std::move(items)), pairs_(std::move(pairs)) {
        if (pairs_.empty()) throw InputError("interaction skeleton is empty");
        detail::check_indices<Interaction>(pairs_, *users_, *items_);
        detail::sort_and_check_unique(pairs_, *users_, *items_);

        std::vector<char> seen_user(users_->size(), 0), seen_item(items_->size(), 0);
        for (const auto& p : pairs_) {
            seen_user[p.user] = 1;
            seen_item[p.item] = 1;
        }
        if (std::find(seen_user.begin(), seen_user.end(), 0) != seen_user.end())
            throw InputError("skeleton has a user without interactions");
        if (std::find(seen_item.begin(), seen_item.end(), 0) != seen_item.end())
            throw InputError("skeleton has an item without interactions");
    }

    static InteractionSkeleton from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
        std::vector<std::string> u, i;
        u.reserve(pairs.size());
        i.reserve(pairs.size());
        for (const auto& [user, item] : pairs) {
            u.push_back(user);
            i.push_back(item);
        }
        auto users = std::make_shared<const IdTable>(std::move(u));
        auto items = std::make_shared<const IdTable>(std::move(i));
        std::vector<Interaction> rows;
        rows.reserve(pairs.size());
        for (const auto& [user, item] : pairs) rows.push_back({users->at(user), items->at(item)});
        return InteractionSkeleton(std::move(users), std::move(items), std::move(rows));
    }

    const IdTable& users() const { return *users_; }
    const IdTable& items() const { return *items_; }
    const std::shared_ptr<const IdTable>& user_table() const { return users_; }
    const std::shared_ptr<const IdTable>& item_table() const { return items_; }

    std::size_t num_users() const { return users_ ? users_->size() : 0; }
    std::size_t num_items() const { return items_ ? items_->size() : 0; }
    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }

    /// Sorted by (user, item).
    std::span<const Interaction> interactions() const noexcept { return pairs_; }

private:
    std::shared_ptr<const IdTable> users_;
    std::shared_ptr<const IdTable> items_;
    std::vector<Interaction> pairs_;
};

/// (user, item, rating) triples on the 1..10 scale.
///
/// Subsets built with `filter` share the id tables of their parent, so indices
/// stay comparable across a dataset and its training/test splits. Users and
/// items of the tables may therefore have no triple in a given subset.
class RatingDataset {
public:
    RatingDataset() = default;

    RatingDataset(std::shared_ptr<const IdTable> users, std::shared_ptr<const IdTable> items,
                  std::vector<RatingTriple> triples)
        : users_(std::move(users)), items_(std::move(items)), triples_(std::move(triples)) {
        detail::check_indices<RatingTriple>(triples_, *users_, *items_);
        for (const auto& t : triples_)
            if (t.rating < kMinRating || t.rating > kMaxRating)
                throw InputError("rating " + std::to_string(t.rating) + " for (" + users_->name(t.user) + ", " +
                                 items_->name(t.item) + ") is outside 1..10");
        detail::sort_and_check_unique(triples_, *users_, *items_);
    }

    static RatingDataset from_triples(const std::vector<std::tuple<std::string, std::string, int>>& rows) {
        std::vector<std::string> u, i;
        for (const auto& [user, item, rating] : rows) {
            u.push_back(user);
            i.push_back(item);
        }
        auto users = std::make_shared<const IdTable>(std::move(u));
        auto items = std::make_shared<const IdTable>(std::move(i));
        std::vector<RatingTriple> triples;
        triples.reserve(rows.size());
        for (const auto& [user, item, rating] : rows) triples.push_back({users->at(user), items->at(item), rating});
        return RatingDataset(std::move(users), std::move(items), std::move(triples));
    }

    /// Attach one rating per skeleton interaction, in skeleton order.
    static RatingDataset from_skeleton(const InteractionSkeleton& skeleton, std::span<const int> ratings) {
        if (ratings.size() != skeleton.size()) throw ValidationError("rating count does not match skeleton size");
        std::vector<RatingTriple> triples;
        triples.reserve(ratings.size());
        const auto pairs = skeleton.interactions();
        for (std::size_t k = 0; k < pairs.size(); ++k) triples.push_back({pairs[k].user, pairs[k].item, ratings[k]});
        return RatingDataset(skeleton.user_table(), skeleton.item_table(), std::move(triples));
    }

    template <class Pred>
    RatingDataset filter(Pred&& keep) const {
        std::vector<RatingTriple> out;
        for (const auto& t : triples_)
            if (keep(t)) out.push_back(t);
        return RatingDataset(users_, items_, std::move(out), Trusted{});
    }

    /// Interaction structure of the dataset. Requires every table entry to be
    /// used, which holds for datasets that were not produced by `filter`.
    InteractionSkeleton skeleton() const {
        std::vector<Interaction> pairs;
        pairs.reserve(triples_.size());
        for (const auto& t : triples_) pairs.push_back({t.user, t.item});
        return InteractionSkeleton(users_, items_, std::move(pairs));
    }

    const IdTable& users() const { return *users_; }
    const IdTable& items() const { return *items_; }
    const std::shared_ptr<const IdTable>& user_table() const { return users_; }
    const std::shared_ptr<const IdTable>& item_table() const { return items_; }

    std::size_t num_users() const { return users_ ? users_->size() : 0; }
    std::size_t num_items() const { return items_ ? items_->size() : 0; }
    std::size_t size() const noexcept { return triples_.size(); }
    bool empty() const noexcept { return triples_.empty(); }

    /// Sorted by (user, item).
    std::span<const RatingTriple> triples() const noexcept { return triples_; }

private:
    struct Trusted {};
    RatingDataset(std::shared_ptr<const IdTable> users, std::shared_ptr<const IdTable> items,
                  std::vector<RatingTriple> triples, Trusted)
        : users_(std::move(users)), items_(std::move(items)), triples_(std::move(triples)) {}

    std::shared_ptr<const IdTable> users_;
    std::shared_ptr<const IdTable> items_;
    std::vector<RatingTriple> triples_;
};

} // namespace popbias
