#include "prism/evaluation.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace prism {

TopicWordLists TopicWordLists::from_model(const TopicModel& model, const Vocabulary& vocab, int n) {
    if (n < 2) throw ConfigError("top-word lists need n >= 2");
    TopicWordLists out;
    out.n = n;
    for (const auto& ids : model.top_words(n)) {
        std::vector<std::string> words;
        words.reserve(ids.size());
        for (int id : ids) words.push_back(vocab.terms[static_cast<std::size_t>(id)]);
        out.topics.push_back(std::move(words));
    }
    return out;
}

namespace {

constexpr double kLogEps = 1e-12;

// Presence counts over windows restricted to `ids`; joint(i,i) is the marginal.
struct PairCounts {
    Eigen::MatrixXd joint;
    double windows = 0.0;
};

PairCounts count_pairs(const Corpus& reference, const WindowStrategy& window,
                       const std::vector<int>& ids) {
    std::vector<int> slot(static_cast<std::size_t>(reference.vocab_size()), -1);
    for (std::size_t s = 0; s < ids.size(); ++s) slot[static_cast<std::size_t>(ids[s])] = static_cast<int>(s);

    PairCounts pc;
    pc.joint = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ids.size()),
                                     static_cast<Eigen::Index>(ids.size()));
    std::vector<int> present;
    for_each_window(reference, window, [&](const std::vector<int>& words) {
        pc.windows += 1.0;
        present.clear();
        for (int w : words)
            if (slot[static_cast<std::size_t>(w)] >= 0) present.push_back(slot[static_cast<std::size_t>(w)]);
        for (std::size_t a = 0; a < present.size(); ++a) {
            pc.joint(present[a], present[a]) += 1.0;
            for (std::size_t b = a + 1; b < present.size(); ++b) {
                pc.joint(present[a], present[b]) += 1.0;
                pc.joint(present[b], present[a]) += 1.0;
            }
        }
    });
    if (pc.windows <= 0.0) throw DataError("reference corpus produced no windows");
    return pc;
}

double npmi_value(double joint, double ci, double cj, double windows) {
    if (joint <= 0.0) return -1.0;
    const double pij = joint / windows;
    const double pi = ci / windows;
    const double pj = cj / windows;
    const double num = std::log(pij + kLogEps) - std::log(pi + kLogEps) - std::log(pj + kLogEps);
    const double den = -std::log(pij + kLogEps);
    return std::clamp(num / den, -1.0, 1.0);
}

std::vector<int> resolve_ids(const std::vector<std::string>& words, const Vocabulary& vocab) {
    std::vector<int> ids;
    ids.reserve(words.size());
    for (const auto& w : words) ids.push_back(vocab.id(w));
    return ids;
}

}  // namespace

CoherenceScores npmi_score(const TopicWordLists& lists, const Corpus& reference,
                           const WindowStrategy& window) {
    if (lists.topics.empty()) throw ConfigError("no topics to score");

    std::set<int> id_union;
    std::vector<std::vector<int>> topic_ids;
    for (const auto& topic : lists.topics) {
        topic_ids.push_back(resolve_ids(topic, reference.vocab));
        id_union.insert(topic_ids.back().begin(), topic_ids.back().end());
    }
    std::vector<int> ids(id_union.begin(), id_union.end());
    PairCounts pc = count_pairs(reference, window, ids);
    std::vector<int> slot(static_cast<std::size_t>(reference.vocab_size()), -1);
    for (std::size_t s = 0; s < ids.size(); ++s) slot[static_cast<std::size_t>(ids[s])] = static_cast<int>(s);

    CoherenceScores out;
    out.per_topic.resize(static_cast<Eigen::Index>(lists.topics.size()));
    for (std::size_t t = 0; t < topic_ids.size(); ++t) {
        const auto& tw = topic_ids[t];
        double sum = 0.0;
        int pairs = 0;
        for (std::size_t a = 0; a < tw.size(); ++a)
            for (std::size_t b = a + 1; b < tw.size(); ++b) {
                const int i = slot[static_cast<std::size_t>(tw[a])];
                const int j = slot[static_cast<std::size_t>(tw[b])];
                sum += npmi_value(pc.joint(i, j), pc.joint(i, i), pc.joint(j, j), pc.windows);
                ++pairs;
            }
        out.per_topic[static_cast<Eigen::Index>(t)] = pairs > 0 ? sum / pairs : 0.0;
    }
    out.mean = out.per_topic.mean();
    return out;
}

CoherenceScores cv_score(const TopicWordLists& lists, const Corpus& reference, int sliding_window) {
    if (sliding_window < 2) throw ConfigError("c_v sliding window must be >= 2");
    if (lists.topics.empty()) throw ConfigError("no topics to score");
    const int V = reference.vocab_size();

    std::set<int> id_union;
    std::vector<std::vector<int>> topic_ids;
    for (const auto& topic : lists.topics) {
        topic_ids.push_back(resolve_ids(topic, reference.vocab));
        id_union.insert(topic_ids.back().begin(), topic_ids.back().end());
    }
    std::vector<int> ids(id_union.begin(), id_union.end());
    std::vector<int> slot(static_cast<std::size_t>(V), -1);
    for (std::size_t s = 0; s < ids.size(); ++s) slot[static_cast<std::size_t>(ids[s])] = static_cast<int>(s);

    // Joint counts of each tracked word against the full vocabulary, plus
    // marginal window counts for every word.
    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ids.size()), V);
    Eigen::VectorXd marginal = Eigen::VectorXd::Zero(V);
    double windows = 0.0;
    const WindowStrategy strategy = WindowStrategy::sliding(sliding_window);
    std::vector<int> present;
    for_each_window(reference, strategy, [&](const std::vector<int>& words) {
        windows += 1.0;
        present.clear();
        for (int w : words) {
            marginal[w] += 1.0;
            if (slot[static_cast<std::size_t>(w)] >= 0) present.push_back(slot[static_cast<std::size_t>(w)]);
        }
        for (int s : present)
            for (int w : words) joint(s, w) += 1.0;
    });
    if (windows <= 0.0) throw DataError("reference corpus produced no windows");

    // NPMI context vectors; never-co-occurring entries stay 0 so disjoint
    // supports give orthogonal vectors.
    Eigen::MatrixXd ctx = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ids.size()), V);
    for (std::size_t s = 0; s < ids.size(); ++s) {
        if (marginal[ids[s]] <= 0.0)
            throw DataError("topic word never occurs in the reference corpus");
        for (int w = 0; w < V; ++w)
            if (joint(static_cast<Eigen::Index>(s), w) > 0.0)
                ctx(static_cast<Eigen::Index>(s), w) =
                    npmi_value(joint(static_cast<Eigen::Index>(s), w), marginal[ids[s]], marginal[w],
                               windows);
    }
    Eigen::VectorXd norms(static_cast<Eigen::Index>(ids.size()));
    for (Eigen::Index s = 0; s < norms.size(); ++s) norms[s] = ctx.row(s).norm();

    CoherenceScores out;
    out.per_topic.resize(static_cast<Eigen::Index>(lists.topics.size()));
    for (std::size_t t = 0; t < topic_ids.size(); ++t) {
        const auto& tw = topic_ids[t];
        double sum = 0.0;
        int pairs = 0;
        for (std::size_t a = 0; a < tw.size(); ++a)
            for (std::size_t b = a + 1; b < tw.size(); ++b) {
                const int i = slot[static_cast<std::size_t>(tw[a])];
                const int j = slot[static_cast<std::size_t>(tw[b])];
                const double pair_npmi =
                    npmi_value(joint(i, tw[b]), marginal[tw[a]], marginal[tw[b]], windows);
                double cos = 0.0;
                if (norms[i] > 0.0 && norms[j] > 0.0)
                    cos = ctx.row(i).dot(ctx.row(j)) / (norms[i] * norms[j]);
                sum += pair_npmi * cos;
                ++pairs;
            }
        out.per_topic[static_cast<Eigen::Index>(t)] = pairs > 0 ? sum / pairs : 0.0;
    }
    out.mean = out.per_topic.mean();
    return out;
}

std::vector<WidInstance> build_wid_instances(const TopicModel& model, const Vocabulary& vocab,
                                             int n, std::uint64_t seed, double high_rank_fraction) {
    const int K = static_cast<int>(model.phi.rows());
    const int V = static_cast<int>(model.phi.cols());
    if (K < 2) throw ConfigError("word intrusion needs K >= 2");
    if (n < 2 || n > V) throw ConfigError("invalid top-word count for intrusion");

    const auto tops = model.top_words(n);

    // Per-topic rank of every word (phi descending, ties by id).
    std::vector<std::vector<int>> rank(static_cast<std::size_t>(K), std::vector<int>(static_cast<std::size_t>(V)));
    {
        std::vector<int> order(static_cast<std::size_t>(V));
        for (int k = 0; k < K; ++k) {
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                if (model.phi(k, a) != model.phi(k, b)) return model.phi(k, a) > model.phi(k, b);
                return a < b;
            });
            for (int r = 0; r < V; ++r) rank[static_cast<std::size_t>(k)][static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
        }
    }
    const int high_cutoff = static_cast<int>(std::ceil(high_rank_fraction * V));

    Rng rng(seed);
    std::vector<WidInstance> out;
    for (int t = 0; t < K; ++t) {
        std::set<int> own(tops[static_cast<std::size_t>(t)].begin(), tops[static_cast<std::size_t>(t)].end());
        std::set<int> pool_set;
        for (int o = 0; o < K; ++o) {
            if (o == t) continue;
            for (int w : tops[static_cast<std::size_t>(o)]) {
                if (own.count(w)) continue;
                if (rank[static_cast<std::size_t>(t)][static_cast<std::size_t>(w)] < high_cutoff) continue;
                pool_set.insert(w);
            }
        }
        if (pool_set.empty()) {
            log_warn("topic " + std::to_string(t) + " has no eligible intruder; skipped");
            continue;
        }
        std::vector<int> pool(pool_set.begin(), pool_set.end());
        const int intruder = pool[uniform_below(rng, pool.size())];

        std::vector<int> displayed = tops[static_cast<std::size_t>(t)];
        displayed.push_back(intruder);
        for (std::size_t i = displayed.size() - 1; i > 0; --i)
            std::swap(displayed[i], displayed[uniform_below(rng, i + 1)]);

        WidInstance inst;
        inst.id = static_cast<int>(out.size());
        inst.topic_id = t;
        inst.seed = seed;
        for (std::size_t i = 0; i < displayed.size(); ++i) {
            inst.displayed_words.push_back(vocab.terms[static_cast<std::size_t>(displayed[i])]);
            if (displayed[i] == intruder) inst.intruder_index = static_cast<int>(i);
        }
        out.push_back(std::move(inst));
    }
    return out;
}

std::string render_wid_prompt(const WidInstance& instance) {
    std::ostringstream p;
    p << "You will see a numbered list of words. Exactly one word does not belong\n"
         "with the others. Identify it and answer with its number only.\n\n"
         "Example:\n1. apple\n2. banana\n3. carburetor\n4. pear\nAnswer: 3\n\n"
         "Example:\n1. guitar\n2. senate\n3. drums\n4. violin\nAnswer: 2\n\n"
         "Word list:\n";
    for (std::size_t i = 0; i < instance.displayed_words.size(); ++i)
        p << (i + 1) << ". " << instance.displayed_words[i] << "\n";
    p << "Answer:";
    return p.str();
}

std::string wid_request_line(const WidInstance& instance) {
    std::string esc;
    for (char c : render_wid_prompt(instance)) {
        if (c == '\\') esc += "\\\\";
        else if (c == '\n') esc += "\\n";
        else if (c == '\t') esc += "\\t";
        else esc += c;
    }
    return std::to_string(instance.id) + "\t" + esc;
}

std::optional<int> ScriptedJudge::judge(const WidInstance& instance) {
    auto it = answers_.find(instance.id);
    if (it == answers_.end()) return std::nullopt;
    return it->second;
}

ScriptedJudge ScriptedJudge::oracle(const std::vector<WidInstance>& instances) {
    std::unordered_map<int, int> answers;
    for (const auto& inst : instances) answers[inst.id] = inst.intruder_index + 1;
    return ScriptedJudge(std::move(answers));
}

std::optional<int> UniformRandomJudge::judge(const WidInstance& instance) {
    return 1 + static_cast<int>(uniform_below(rng_, instance.displayed_words.size()));
}

EmbeddingJudge EmbeddingJudge::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embedding file: " + path);
    std::unordered_map<std::string, Eigen::VectorXd> vectors;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string term;
        ss >> term;
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        Eigen::VectorXd vec(static_cast<Eigen::Index>(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i) vec[static_cast<Eigen::Index>(i)] = vals[i];
        vectors.emplace(term, std::move(vec));
    }
    return EmbeddingJudge(std::move(vectors));
}

std::optional<int> EmbeddingJudge::judge(const WidInstance& instance) {
    const auto& words = instance.displayed_words;
    std::vector<const Eigen::VectorXd*> vecs;
    for (const auto& w : words) {
        auto it = vectors_.find(w);
        if (it == vectors_.end()) return std::nullopt;
        vecs.push_back(&it->second);
    }
    int best = 0;
    double best_sim = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < vecs.size(); ++a) {
        double sim = 0.0;
        for (std::size_t b = 0; b < vecs.size(); ++b) {
            if (a == b) continue;
            const double na = vecs[a]->norm(), nb = vecs[b]->norm();
            sim += na > 0.0 && nb > 0.0 ? vecs[a]->dot(*vecs[b]) / (na * nb) : 0.0;
        }
        sim /= static_cast<double>(vecs.size() - 1);
        if (sim < best_sim) {
            best_sim = sim;
            best = static_cast<int>(a);
        }
    }
    return best + 1;
}

PipeJudge::PipeJudge(const std::string& command, double timeout_seconds)
    : timeout_seconds_(timeout_seconds) {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
        throw StageError("cannot create judge pipes");
    const pid_t pid = fork();
    if (pid < 0) throw StageError("cannot fork judge process");
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    out_fd_ = to_child[1];
    in_fd_ = from_child[0];
    pid_ = pid;
}

PipeJudge::~PipeJudge() {
    if (out_fd_ >= 0) close(out_fd_);
    if (in_fd_ >= 0) close(in_fd_);
    if (pid_ > 0) {
        int status = 0;
        if (waitpid(static_cast<pid_t>(pid_), &status, WNOHANG) == 0) {
            kill(static_cast<pid_t>(pid_), SIGTERM);
            waitpid(static_cast<pid_t>(pid_), &status, 0);
        }
    }
}

std::optional<int> PipeJudge::judge(const WidInstance& instance) {
    const std::string req = wid_request_line(instance) + "\n";
    std::size_t written = 0;
    while (written < req.size()) {
        const ssize_t n = write(out_fd_, req.data() + written, req.size() - written);
        if (n <= 0) return std::nullopt;
        written += static_cast<std::size_t>(n);
    }
    // Read one reply line within the timeout.
    while (buffer_.find('\n') == std::string::npos) {
        struct pollfd pfd = {in_fd_, POLLIN, 0};
        const int pr = poll(&pfd, 1, static_cast<int>(timeout_seconds_ * 1000.0));
        if (pr <= 0) return std::nullopt;
        char chunk[4096];
        const ssize_t n = read(in_fd_, chunk, sizeof chunk);
        if (n <= 0) return std::nullopt;
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
    const auto nl = buffer_.find('\n');
    std::string line = buffer_.substr(0, nl);
    buffer_.erase(0, nl + 1);

    const auto tab = line.find('\t');
    if (tab == std::string::npos) return std::nullopt;
    try {
        if (std::stoi(line.substr(0, tab)) != instance.id) return std::nullopt;
        return std::stoi(line.substr(tab + 1));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

WidResult wid_accuracy(const std::vector<WidInstance>& instances, JudgeEndpoint& judge,
                       const WidOptions& opts) {
    if (instances.empty()) throw ConfigError("no intrusion instances to score");
    WidResult res;
    for (const auto& inst : instances) {
        const auto reply = judge.judge(inst);
        if (!reply.has_value() || *reply < 1 ||
            *reply > static_cast<int>(inst.displayed_words.size())) {
            ++res.failed;
            log_warn("judge failed on instance " + std::to_string(inst.id));
            if (opts.exclude_failures) continue;
            ++res.scored;
            continue;
        }
        ++res.scored;
        if (*reply == inst.intruder_index + 1) ++res.correct;
    }
    res.accuracy = res.scored > 0 ? static_cast<double>(res.correct) / res.scored : 0.0;
    return res;
}

PathwayDB PathwayDB::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open pathway file: " + path);
    PathwayDB db;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw DataError("pathway line missing tab: " + line);
        db.names.push_back(line.substr(0, tab));
        std::vector<std::string> genes;
        std::stringstream ss(line.substr(tab + 1));
        std::string g;
        while (std::getline(ss, g, ',')) {
            if (!g.empty()) genes.push_back(g);
        }
        if (genes.empty()) throw DataError("pathway with no members: " + db.names.back());
        db.members.push_back(std::move(genes));
    }
    if (db.names.empty()) throw DataError("pathway database is empty: " + path);
    return db;
}

namespace {

double lchoose(long long n, long long k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
           std::lgamma(static_cast<double>(n - k + 1));
}

}  // namespace

double hypergeom_upper_tail(long long x, long long N, long long M, long long K) {
    if (N < 1 || M < 0 || K < 0 || M > N || K > N)
        throw ConfigError("invalid hypergeometric parameters");
    if (x <= 0) return 1.0;
    const long long hi = std::min(K, M);
    if (x > hi) return 0.0;
    const double denom = lchoose(N, K);
    double p = 0.0;
    for (long long i = x; i <= hi; ++i) {
        const double t = lchoose(M, i) + lchoose(N - M, K - i) - denom;
        if (std::isfinite(t)) p += std::exp(t);
    }
    return std::min(p, 1.0);
}

std::vector<double> bh_adjust(const std::vector<double>& p) {
    const std::size_t m = p.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> q(m);
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const double adj = p[order[r]] * static_cast<double>(m) / static_cast<double>(r + 1);
        running = std::min(running, adj);
        q[order[r]] = running;
    }
    return q;
}

double spearman_coherence(const std::vector<std::string>& genes, const FeatureMatrix& expression) {
    if (genes.size() < 2) throw ConfigError("spearman coherence needs >= 2 genes");
    const Eigen::Index cells = expression.values.rows();
    if (cells < 3) throw ConfigError("spearman coherence needs >= 3 cells");

    // Average-rank transform per gene.
    std::vector<Eigen::VectorXd> ranks;
    std::vector<bool> constant;
    for (const auto& g : genes) {
        const int col = expression.gene_column(g);
        std::vector<int> idx(static_cast<std::size_t>(cells));
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            return expression.values(a, col) < expression.values(b, col);
        });
        Eigen::VectorXd r(cells);
        Eigen::Index i = 0;
        while (i < cells) {
            Eigen::Index j = i;
            while (j + 1 < cells &&
                   expression.values(idx[static_cast<std::size_t>(j + 1)], col) ==
                       expression.values(idx[static_cast<std::size_t>(i)], col))
                ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (Eigen::Index t = i; t <= j; ++t) r[idx[static_cast<std::size_t>(t)]] = avg;
            i = j + 1;
        }
        const bool is_const = (r.array() == r[0]).all();
        if (is_const) log_warn("gene '" + g + "' is constant across cells; its pairs score 0");
        constant.push_back(is_const);
        ranks.push_back(std::move(r));
    }

    double sum = 0.0;
    int pairs = 0;
    for (std::size_t a = 0; a < ranks.size(); ++a)
        for (std::size_t b = a + 1; b < ranks.size(); ++b) {
            ++pairs;
            if (constant[a] || constant[b]) continue;
            const Eigen::VectorXd ca = ranks[a].array() - ranks[a].mean();
            const Eigen::VectorXd cb = ranks[b].array() - ranks[b].mean();
            const double denom = ca.norm() * cb.norm();
            if (denom > 0.0) sum += ca.dot(cb) / denom;
        }
    return sum / pairs;
}

GeneSetReport gene_set_metrics(const TopicWordLists& lists, const FeatureMatrix& expression,
                               const PathwayDB& pathways, long long universe_size,
                               double q_threshold, bool size_weighted_coverage) {
    if (pathways.names.empty()) throw ConfigError("pathway database is empty");
    for (const auto& members : pathways.members)
        if (static_cast<long long>(members.size()) > universe_size)
            throw ConfigError("pathway larger than the gene universe");

    GeneSetReport report;
    double strength_sum = 0.0;
    int strength_count = 0;
    for (const auto& topic : lists.topics) {
        std::set<std::string> gene_set(topic.begin(), topic.end());
        TopicGeneSetStats stats;
        stats.coherence = spearman_coherence(topic, expression);

        std::vector<double> pvals;
        std::vector<long long> overlaps;
        for (std::size_t p = 0; p < pathways.names.size(); ++p) {
            long long x = 0;
            for (const auto& g : pathways.members[p]) x += gene_set.count(g) ? 1 : 0;
            overlaps.push_back(x);
            pvals.push_back(hypergeom_upper_tail(
                x, universe_size, static_cast<long long>(pathways.members[p].size()),
                static_cast<long long>(gene_set.size())));
        }
        const std::vector<double> qvals = bh_adjust(pvals);

        double cov_sum = 0.0, size_sum = 0.0, overlap_sum = 0.0;
        int n_sig = 0;
        double min_q = 1.0;
        for (std::size_t p = 0; p < qvals.size(); ++p) {
            if (qvals[p] < q_threshold) {
                stats.enriched.emplace_back(pathways.names[p], qvals[p]);
                const double sz = static_cast<double>(pathways.members[p].size());
                cov_sum += static_cast<double>(overlaps[p]) / sz;
                size_sum += sz;
                overlap_sum += static_cast<double>(overlaps[p]);
                ++n_sig;
                min_q = std::min(min_q, qvals[p]);
            }
        }
        std::sort(stats.enriched.begin(), stats.enriched.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second < b.second;
            return a.first < b.first;
        });
        if (n_sig > 0) {
            stats.coverage = size_weighted_coverage ? overlap_sum / size_sum
                                                    : cov_sum / static_cast<double>(n_sig);
            stats.strength = -std::log10(std::max(min_q, 1e-300));
            strength_sum += *stats.strength;
            ++strength_count;
        }
        report.per_topic.push_back(std::move(stats));
    }

    for (const auto& s : report.per_topic) {
        report.mean_coherence += s.coherence;
        report.mean_coverage += s.coverage;
    }
    report.mean_coherence /= static_cast<double>(report.per_topic.size());
    report.mean_coverage /= static_cast<double>(report.per_topic.size());
    if (strength_count > 0) report.mean_strength = strength_sum / strength_count;
    return report;
}

std::string gene_set_report_text(const GeneSetReport& report) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t t = 0; t < report.per_topic.size(); ++t) {
        const auto& s = report.per_topic[t];
        out << "topic\t" << t << "\tcoherence=" << s.coherence << "\tcoverage=" << s.coverage
            << "\tstrength=";
        if (s.strength.has_value())
            out << *s.strength;
        else
            out << "absent";
        out << "\tenriched=";
        for (std::size_t e = 0; e < s.enriched.size(); ++e)
            out << (e ? ";" : "") << s.enriched[e].first << ":" << s.enriched[e].second;
        out << "\n";
    }
    out << "aggregate\tmean_coherence=" << report.mean_coherence
        << "\tmean_coverage=" << report.mean_coverage << "\tmean_strength=";
    if (report.mean_strength.has_value())
        out << *report.mean_strength;
    else
        out << "absent";
    out << "\n";
    return out.str();
}

}  // namespace prism
