#include "porter.hpp"

#include <array>
#include <cstddef>

namespace ccp {

namespace {

bool is_vowel_letter(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// y counts as a vowel when preceded by a consonant.
bool is_consonant(const std::string& w, std::size_t i) {
    char c = w[i];
    if (is_vowel_letter(c)) return false;
    if (c == 'y') return i == 0 || !is_consonant(w, i - 1);
    return true;
}

// Number of VC sequences in w[0..len).
int measure(const std::string& w, std::size_t len) {
    int m = 0;
    std::size_t i = 0;
    while (i < len && is_consonant(w, i)) ++i;
    while (i < len) {
        while (i < len && !is_consonant(w, i)) ++i;
        if (i >= len) break;
        ++m;
        while (i < len && is_consonant(w, i)) ++i;
    }
    return m;
}

bool contains_vowel(const std::string& w, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i)
        if (!is_consonant(w, i)) return true;
    return false;
}

bool ends_double_consonant(const std::string& w) {
    std::size_t n = w.size();
    return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

// *o: stem ends cvc where the final c is not w, x or y.
bool ends_cvc(const std::string& w, std::size_t len) {
    if (len < 3) return false;
    if (!is_consonant(w, len - 3) || is_consonant(w, len - 2) || !is_consonant(w, len - 1))
        return false;
    char c = w[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(const std::string& w, std::string_view suffix) {
    return w.size() >= suffix.size() &&
           w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
    int min_measure;  // condition on the stem left after removing the suffix
};

// Longest matching suffix wins; the measure condition is then applied to it
// alone, with no fallback to shorter suffixes.
bool apply_rules(std::string& w, std::initializer_list<Rule> rules) {
    const Rule* best = nullptr;
    for (const auto& rule : rules)
        if (ends_with(w, rule.suffix) && (!best || rule.suffix.size() > best->suffix.size()))
            best = &rule;
    if (!best) return false;
    std::size_t stem_len = w.size() - best->suffix.size();
    if (measure(w, stem_len) > best->min_measure) {
        w.resize(stem_len);
        w.append(best->replacement);
        return true;
    }
    return false;
}

void step1a(std::string& w) {
    if (ends_with(w, "sses")) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ies")) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ss")) {
        // keep
    } else if (ends_with(w, "s")) {
        w.resize(w.size() - 1);
    }
}

void step1b(std::string& w) {
    if (ends_with(w, "eed")) {
        if (measure(w, w.size() - 3) > 0) w.resize(w.size() - 1);
        return;
    }
    bool stripped = false;
    if (ends_with(w, "ed") && contains_vowel(w, w.size() - 2)) {
        w.resize(w.size() - 2);
        stripped = true;
    } else if (ends_with(w, "ing") && contains_vowel(w, w.size() - 3)) {
        w.resize(w.size() - 3);
        stripped = true;
    }
    if (!stripped) return;
    if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
        w.push_back('e');
    } else if (ends_double_consonant(w)) {
        char c = w.back();
        if (c != 'l' && c != 's' && c != 'z') w.resize(w.size() - 1);
    } else if (measure(w, w.size()) == 1 && ends_cvc(w, w.size())) {
        w.push_back('e');
    }
}

void step1c(std::string& w) {
    if (ends_with(w, "y") && contains_vowel(w, w.size() - 1)) w.back() = 'i';
}

void step2(std::string& w) {
    apply_rules(w, {{"ational", "ate", 0}, {"tional", "tion", 0}, {"enci", "ence", 0},
                    {"anci", "ance", 0},  {"izer", "ize", 0},    {"abli", "able", 0},
                    {"alli", "al", 0},    {"entli", "ent", 0},   {"eli", "e", 0},
                    {"ousli", "ous", 0},  {"ization", "ize", 0}, {"ation", "ate", 0},
                    {"ator", "ate", 0},   {"alism", "al", 0},    {"iveness", "ive", 0},
                    {"fulness", "ful", 0},{"ousness", "ous", 0}, {"aliti", "al", 0},
                    {"iviti", "ive", 0},  {"biliti", "ble", 0}});
}

void step3(std::string& w) {
    apply_rules(w, {{"icate", "ic", 0}, {"ative", "", 0}, {"alize", "al", 0},
                    {"iciti", "ic", 0}, {"ical", "ic", 0}, {"ful", "", 0},
                    {"ness", "", 0}});
}

void step4(std::string& w) {
    // "ion" additionally requires the stem to end in s or t.
    const Rule* best = nullptr;
    static constexpr std::array<std::string_view, 19> suffixes = {
        "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
        "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize"};
    static Rule rules[suffixes.size()];
    static bool init = [] {
        for (std::size_t i = 0; i < suffixes.size(); ++i) rules[i] = {suffixes[i], "", 1};
        return true;
    }();
    (void)init;
    for (const auto& rule : rules)
        if (ends_with(w, rule.suffix) && (!best || rule.suffix.size() > best->suffix.size()))
            best = &rule;
    if (!best) return;
    std::size_t stem_len = w.size() - best->suffix.size();
    if (measure(w, stem_len) <= 1) return;
    if (best->suffix == "ion" && stem_len > 0 && w[stem_len - 1] != 's' && w[stem_len - 1] != 't')
        return;
    w.resize(stem_len);
}

void step5a(std::string& w) {
    if (!ends_with(w, "e")) return;
    int m = measure(w, w.size() - 1);
    if (m > 1 || (m == 1 && !ends_cvc(w, w.size() - 1))) w.resize(w.size() - 1);
}

void step5b(std::string& w) {
    if (measure(w, w.size()) > 1 && ends_double_consonant(w) && w.back() == 'l')
        w.resize(w.size() - 1);
}

}  // namespace

std::string porter_stem(std::string_view word) {
    std::string w(word);
    if (w.size() <= 2) return w;
    step1a(w);
    step1b(w);
    step1c(w);
    step2(w);
    step3(w);
    step4(w);
    step5a(w);
    step5b(w);
    return w;
}

}  // namespace ccp
