#include "forage/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "forage/csv.hpp"
#include "forage/errors.hpp"

namespace forage {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string fold(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> split_pipe(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find('|', start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

int CategoryScheme::add_or_get(const std::string& label) {
    const std::string key = fold(label);
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (fold(labels_[i]) == key) return static_cast<int>(i);
    }
    labels_.push_back(label);
    return static_cast<int>(labels_.size() - 1);
}

std::optional<int> CategoryScheme::find(const std::string& label) const {
    const std::string key = fold(label);
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (fold(labels_[i]) == key) return static_cast<int>(i);
    }
    return std::nullopt;
}

const std::string& CategoryScheme::label(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= labels_.size())
        throw ValidationError("category id out of range: " + std::to_string(id));
    return labels_[static_cast<std::size_t>(id)];
}

bool Vocabulary::shares_category(int a, int b) const {
    const auto& ca = items[static_cast<std::size_t>(a)].categories;
    const auto& cb = items[static_cast<std::size_t>(b)].categories;
    for (int c : ca) {
        if (cb.count(c)) return true;
    }
    return false;
}

TextMode parse_text_mode(const std::string& s) {
    if (s == "name_only") return TextMode::name_only;
    if (s == "name_plus_description") return TextMode::name_plus_description;
    throw ValidationError("unknown text mode: '" + s + "'");
}

std::string to_string(TextMode m) {
    return m == TextMode::name_only ? "name_only" : "name_plus_description";
}

Vocabulary load_vocabulary(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw ValidationError("vocabulary: empty file " + path);
    const auto& header = rows[0];
    if (header.size() != 3 || header[0] != "name" || header[1] != "description" ||
        header[2] != "categories") {
        throw ValidationError("vocabulary: expected header 'name,description,categories' in " +
                              path);
    }

    Vocabulary vocab;
    std::unordered_set<std::string> seen_names;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 3)
            throw ValidationError("vocabulary: row " + std::to_string(r + 1) + " has " +
                                  std::to_string(row.size()) + " fields, expected 3");
        VocabularyItem item;
        item.id = static_cast<int>(vocab.items.size());
        item.name = trim(row[0]);
        if (item.name.empty())
            throw ValidationError("vocabulary: row " + std::to_string(r + 1) + " has empty name");
        if (!seen_names.insert(fold(item.name)).second)
            throw ValidationError("vocabulary: duplicate name '" + item.name + "' at row " +
                                  std::to_string(r + 1));
        if (!row[1].empty()) item.description = row[1];
        const std::string cats = trim(row[2]);
        if (!cats.empty()) {
            for (const std::string& tok : split_pipe(cats)) {
                const std::string label = trim(tok);
                if (label.empty())
                    throw ValidationError("vocabulary: row " + std::to_string(r + 1) +
                                          " has an empty category token in '" + cats + "'");
                item.categories.insert(vocab.scheme.add_or_get(label));
            }
        }
        vocab.items.push_back(std::move(item));
    }
    return vocab;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("vocabulary: cannot write " + path);
    csv::write_row(out, {"name", "description", "categories"});
    for (const auto& item : vocab.items) {
        std::string cats;
        for (int c : item.categories) {
            if (!cats.empty()) cats += '|';
            cats += vocab.scheme.label(c);
        }
        csv::write_row(out, {item.name, item.description.value_or(""), cats});
    }
    if (!out) throw IoError("vocabulary: write failed for " + path);
}

std::string compose_text(const VocabularyItem& item, TextMode mode) {
    if (mode == TextMode::name_only) return item.name;
    if (!item.description)
        throw ValidationError("item '" + item.name +
                              "' has no description (required by name_plus_description)");
    return item.name + ". " + *item.description;
}

}  // namespace forage
