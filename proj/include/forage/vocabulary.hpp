#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace forage {

struct VocabularyItem {
    int id = 0;                            // dense, 0..N-1, file order
    std::string name;                      // nonempty after trimming
    std::optional<std::string> description;
    std::set<int> categories;              // ids into CategoryScheme; may be empty
};

// Categories with ids in first-appearance order. Labels must be unique
// after case-folding; memberships are nonexclusive.
class CategoryScheme {
public:
    int add_or_get(const std::string& label);          // registers on first use
    std::optional<int> find(const std::string& label) const;
    const std::string& label(int id) const;
    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }

private:
    std::vector<std::string> labels_;
};

struct Vocabulary {
    std::vector<VocabularyItem> items;
    CategoryScheme scheme;

    std::size_t size() const { return items.size(); }
    // True when the items share at least one category.
    bool shares_category(int a, int b) const;
};

enum class TextMode { name_only, name_plus_description };

TextMode parse_text_mode(const std::string& s);
std::string to_string(TextMode m);

// CSV with header `name,description,categories`; `categories` is
// '|'-separated. Ids are assigned in file order.
Vocabulary load_vocabulary(const std::string& path);
void save_vocabulary(const Vocabulary& vocab, const std::string& path);

// name_only -> name; name_plus_description -> "<name>. <description>".
std::string compose_text(const VocabularyItem& item, TextMode mode);

}  // namespace forage
