#pragma once

// Tabular or key/value rendering of command results.

#include <fmt/format.h>

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

namespace tbn::cli {

enum class Format { Table, Kv };

class Table {
public:
    Table(std::string section, std::vector<std::string> header) : section_(std::move(section)), header_(std::move(header)) {}

    void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }
    bool empty() const { return rows_.empty(); }

    // kv keys: section.<first cell>.<column>; the first column names the row.
    void print(std::FILE* out, Format f) const {
        if (f == Format::Kv) {
            for (const auto& r : rows_)
                for (std::size_t c = 1; c < r.size(); ++c) fmt::print(out, "{}.{}.{} = {}\n", section_, r[0], header_[c], r[c]);
            return;
        }
        std::vector<std::size_t> width(header_.size());
        for (std::size_t c = 0; c < header_.size(); ++c) width[c] = header_[c].size();
        for (const auto& r : rows_)
            for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
        fmt::print(out, "== {}\n", section_);
        auto line = [&](const std::vector<std::string>& cells) {
            std::string s;
            for (std::size_t c = 0; c < cells.size(); ++c)
                s += c == 0 ? fmt::format("{:<{}}", cells[c], width[c]) : fmt::format("  {:>{}}", cells[c], width[c]);
            fmt::print(out, "{}\n", s);
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        fmt::print(out, "\n");
    }

private:
    std::string section_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Flat key/value list; in table mode printed as "key: value".
class Fields {
public:
    explicit Fields(std::string section) : section_(std::move(section)) {}

    template <typename T>
    void add(const std::string& key, const T& value) {
        items_.emplace_back(key, fmt::format("{}", value));
    }
    void note(std::string text) { notes_.push_back(std::move(text)); }

    void print(std::FILE* out, Format f) const {
        if (f == Format::Kv) {
            for (const auto& [k, v] : items_) fmt::print(out, "{}.{} = {}\n", section_, k, v);
            for (std::size_t i = 0; i < notes_.size(); ++i) fmt::print(out, "{}.note.{} = {}\n", section_, i, notes_[i]);
            return;
        }
        std::size_t w = 0;
        for (const auto& kv : items_) w = std::max(w, kv.first.size());
        fmt::print(out, "== {}\n", section_);
        for (const auto& [k, v] : items_) fmt::print(out, "{:<{}}  {}\n", k, w, v);
        for (const auto& n : notes_) fmt::print(out, "note: {}\n", n);
        fmt::print(out, "\n");
    }

private:
    std::string section_;
    std::vector<std::pair<std::string, std::string>> items_;
    std::vector<std::string> notes_;
};

inline std::string pct(double fraction) { return fmt::format("{:.2f}%", 100.0 * fraction); }

} // namespace tbn::cli
