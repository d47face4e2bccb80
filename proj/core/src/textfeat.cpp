#include "secrado/textfeat.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

namespace secrado {

int Dictionary::index_of(const std::string& token) const {
    auto it = std::lower_bound(tokens.begin(), tokens.end(), token);
    if (it == tokens.end() || *it != token) return -1;
    return static_cast<int>(it - tokens.begin());
}

void LabeledCorpus::validate() const {
    if (documents.size() != labels.size())
        throw std::invalid_argument("corpus: document/label count mismatch");
    for (int l : labels)
        if (l != -1 && l != 1) throw std::invalid_argument("corpus: labels must be -1 or +1");
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!current.empty()) {
            if (current.size() >= 2) out.push_back(current);
            current.clear();
        }
    }
    if (current.size() >= 2) out.push_back(current);
    return out;
}

Dictionary build_dictionary(const std::vector<LabeledCorpus>& corpora) {
    if (corpora.empty()) throw std::invalid_argument("build_dictionary: no corpora");
    std::set<std::string> vocab;
    for (const LabeledCorpus& corpus : corpora) {
        corpus.validate();
        for (const std::string& doc : corpus.documents)
            for (std::string& tok : tokenize(doc)) vocab.insert(std::move(tok));
    }
    if (vocab.empty()) throw std::invalid_argument("build_dictionary: no tokens");
    Dictionary dict;
    dict.tokens.assign(vocab.begin(), vocab.end());
    return dict;
}

TextFeatures local_text(const Dictionary& dict, const LabeledCorpus& corpus) {
    corpus.validate();
    TextFeatures out;
    out.data.X = Eigen::MatrixXd::Zero(corpus.size(), dict.size());
    out.data.y.resize(corpus.size());
    out.presence.assign(static_cast<size_t>(dict.size()), false);
    for (int i = 0; i < corpus.size(); ++i) {
        out.data.y[i] = corpus.labels[static_cast<size_t>(i)];
        for (const std::string& tok : tokenize(corpus.documents[static_cast<size_t>(i)])) {
            int j = dict.index_of(tok);
            if (j < 0) {
                ++out.dropped_tokens;
                continue;
            }
            out.data.X(i, j) = 1.0;
            out.presence[static_cast<size_t>(j)] = true;
        }
    }
    return out;
}

LabeledCorpus synth_corpus(const std::vector<std::string>& positive_pool,
                           const std::vector<std::string>& negative_pool, int docs_per_class,
                           double noise_rate, SecureRng& rng) {
    if (positive_pool.empty() || negative_pool.empty())
        throw std::invalid_argument("synth_corpus: empty keyword pool");
    for (const std::string& p : positive_pool)
        for (const std::string& q : negative_pool)
            if (p == q) throw std::invalid_argument("synth_corpus: pools must be disjoint");

    static const char* kNoise[] = {"about", "these", "their", "would", "there",
                                   "which", "other", "after", "before", "under"};
    LabeledCorpus corpus;
    for (int cls = 0; cls < 2; ++cls) {
        const auto& pool = cls == 0 ? positive_pool : negative_pool;
        for (int i = 0; i < docs_per_class; ++i) {
            std::string doc;
            int words = 4 + static_cast<int>(rng.next_u64() % 4);
            for (int w = 0; w < words; ++w) {
                bool noise = rng.uniform01() < noise_rate;
                const std::string tok =
                    noise ? kNoise[rng.next_u64() % std::size(kNoise)]
                          : pool[rng.next_u64() % pool.size()];
                if (!doc.empty()) doc.push_back(' ');
                doc += tok;
            }
            corpus.documents.push_back(std::move(doc));
            corpus.labels.push_back(cls == 0 ? 1 : -1);
        }
    }
    return corpus;
}

LabeledCorpus read_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus: " + path.string());
    LabeledCorpus corpus;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("corpus line " + std::to_string(line_no) + ": missing tab");
        std::string label = line.substr(0, tab);
        if (label != "+1" && label != "1" && label != "-1")
            throw std::runtime_error("corpus line " + std::to_string(line_no) + ": bad label '" +
                                     label + "'");
        corpus.labels.push_back(label == "-1" ? -1 : 1);
        corpus.documents.push_back(line.substr(tab + 1));
    }
    corpus.validate();
    return corpus;
}

void write_corpus(const std::filesystem::path& path, const LabeledCorpus& corpus) {
    corpus.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    for (int i = 0; i < corpus.size(); ++i)
        out << (corpus.labels[static_cast<size_t>(i)] > 0 ? "+1" : "-1") << '\t'
            << corpus.documents[static_cast<size_t>(i)] << '\n';
}

Dictionary read_dictionary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dictionary: " + path.string());
    Dictionary dict;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) dict.tokens.push_back(line);
    if (!std::is_sorted(dict.tokens.begin(), dict.tokens.end()))
        throw std::runtime_error("dictionary file not sorted: " + path.string());
    return dict;
}

void write_dictionary(const std::filesystem::path& path, const Dictionary& dict) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    for (const std::string& tok : dict.tokens) out << tok << '\n';
}

}  // namespace secrado
