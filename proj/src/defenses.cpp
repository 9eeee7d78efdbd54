#include "defenses.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <stdexcept>

#include "rng.hpp"

namespace darkfed::defense {

namespace {

void require_nonempty(const std::vector<observed_update>& updates, const char* where) {
    if (updates.empty())
        throw std::invalid_argument(std::string(where) + ": empty update set");
    for (const auto& u : updates)
        vec::check_same_length(updates.front().delta, u.delta, where);
}

ParamVector mean_of(const std::vector<const ParamVector*>& vs) {
    ParamVector m(vs.front()->size(), 0.0);
    for (const ParamVector* v : vs) vec::axpy(m, 1.0, *v);
    for (double& x : m) x /= static_cast<double>(vs.size());
    return m;
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Cosine distance with undefined directions treated as distance 1.
std::vector<std::vector<double>> cosine_distance_matrix(const std::vector<observed_update>& updates) {
    const std::size_t n = updates.size();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            auto c = vec::cosine(updates[i].delta, updates[j].delta);
            double dist = c ? (1.0 - *c) : 1.0;
            d[i][j] = d[j][i] = dist;
        }
    return d;
}

} // namespace

AggregationOutcome agg_fedavg(const std::vector<observed_update>& updates) {
    require_nonempty(updates, "agg_fedavg");
    std::vector<const ParamVector*> vs;
    AggregationOutcome out;
    for (const auto& u : updates) {
        vs.push_back(&u.delta);
        out.admitted_ids.push_back(u.client_id);
        out.weights.push_back(1.0 / static_cast<double>(updates.size()));
    }
    out.aggregate = mean_of(vs);
    return out;
}

AggregationOutcome agg_norm_clipping(const std::vector<observed_update>& updates, double tau) {
    require_nonempty(updates, "agg_norm_clipping");
    if (tau <= 0.0)
        throw std::invalid_argument("agg_norm_clipping: tau must be positive");

    std::vector<ParamVector> clipped;
    clipped.reserve(updates.size());
    for (const auto& u : updates) {
        double n = vec::norm2(u.delta);
        clipped.push_back(n > tau ? vec::scaled(u.delta, tau / n) : u.delta);
    }
    std::vector<const ParamVector*> vs;
    AggregationOutcome out;
    for (std::size_t i = 0; i < updates.size(); ++i) {
        vs.push_back(&clipped[i]);
        out.admitted_ids.push_back(updates[i].client_id);
        out.weights.push_back(1.0 / static_cast<double>(updates.size()));
    }
    out.aggregate = mean_of(vs);
    return out;
}

AggregationOutcome agg_flame(const std::vector<observed_update>& updates, double sigma_noise,
                             std::uint64_t seed) {
    require_nonempty(updates, "agg_flame");
    const std::size_t n = updates.size();
    if (n < 3)
        throw std::invalid_argument("agg_flame: need at least 3 updates");

    auto dist = cosine_distance_matrix(updates);
    const std::size_t min_pts = n / 2 + 1;

    std::vector<double> all_pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) all_pairs.push_back(dist[i][j]);
    std::sort(all_pairs.begin(), all_pairs.end());
    const double median_dist = all_pairs.size() % 2 == 1
                                   ? all_pairs[all_pairs.size() / 2]
                                   : 0.5 * (all_pairs[all_pairs.size() / 2 - 1] +
                                            all_pairs[all_pairs.size() / 2]);

    // Level 1: connected components at the tight-clump scale. Submissions
    // this close are coordinated copies, not independently trained updates;
    // the absolute cap keeps legitimately correlated clients out of it.
    const double clump_scale = std::min(0.25 * median_dist, 0.05);
    std::vector<int> clump(n, -1);
    int n_clumps = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (clump[i] != -1) continue;
        std::deque<std::size_t> frontier{i};
        clump[i] = n_clumps;
        while (!frontier.empty()) {
            std::size_t u = frontier.front();
            frontier.pop_front();
            for (std::size_t v = 0; v < n; ++v)
                if (clump[v] == -1 && dist[u][v] <= clump_scale) {
                    clump[v] = n_clumps;
                    frontier.push_back(v);
                }
        }
        ++n_clumps;
    }
    std::vector<std::size_t> clump_size(n_clumps, 0);
    for (std::size_t i = 0; i < n; ++i) ++clump_size[clump[i]];

    std::vector<std::size_t> admitted;
    int majority_clump = -1;
    for (int c = 0; c < n_clumps; ++c)
        if (clump_size[c] >= min_pts && (majority_clump < 0 || clump_size[c] > clump_size[majority_clump]))
            majority_clump = c;

    if (majority_clump >= 0) {
        for (std::size_t i = 0; i < n; ++i)
            if (clump[i] == majority_clump) admitted.push_back(i);
    } else {
        // Reject sub-majority clumps, then look for a density majority among
        // the rest.
        std::vector<std::size_t> cand;
        for (std::size_t i = 0; i < n; ++i)
            if (clump_size[clump[i]] < 2) cand.push_back(i);

        if (cand.size() < min_pts) {
            // No way to name a majority: the filter declines.
            admitted.resize(n);
            for (std::size_t i = 0; i < n; ++i) admitted[i] = i;
        } else {
            std::vector<double> cand_pairs;
            for (std::size_t a = 0; a < cand.size(); ++a)
                for (std::size_t b = a + 1; b < cand.size(); ++b)
                    cand_pairs.push_back(dist[cand[a]][cand[b]]);
            std::sort(cand_pairs.begin(), cand_pairs.end());
            const double eps = 1.2 * cand_pairs[cand_pairs.size() / 4];

            std::vector<std::vector<std::size_t>> neighbors(cand.size());
            for (std::size_t a = 0; a < cand.size(); ++a)
                for (std::size_t b = 0; b < cand.size(); ++b)
                    if (dist[cand[a]][cand[b]] <= eps) neighbors[a].push_back(b); // includes self

            std::vector<bool> core(cand.size(), false);
            for (std::size_t a = 0; a < cand.size(); ++a) core[a] = neighbors[a].size() >= min_pts;

            std::vector<int> cluster(cand.size(), -1);
            int next_cluster = 0;
            for (std::size_t a = 0; a < cand.size(); ++a) {
                if (!core[a] || cluster[a] != -1) continue;
                std::deque<std::size_t> frontier{a};
                cluster[a] = next_cluster;
                while (!frontier.empty()) {
                    std::size_t u = frontier.front();
                    frontier.pop_front();
                    for (std::size_t v : neighbors[u]) {
                        if (!core[v] || cluster[v] != -1) continue;
                        cluster[v] = next_cluster;
                        frontier.push_back(v);
                    }
                }
                ++next_cluster;
            }
            for (std::size_t a = 0; a < cand.size(); ++a) {
                if (core[a] || cluster[a] != -1) continue;
                for (std::size_t b = 0; b < cand.size(); ++b)
                    if (core[b] && dist[cand[a]][cand[b]] <= eps) {
                        cluster[a] = cluster[b];
                        break;
                    }
            }

            int best = -1;
            std::vector<std::size_t> sizes(next_cluster, 0);
            for (std::size_t a = 0; a < cand.size(); ++a)
                if (cluster[a] >= 0) ++sizes[cluster[a]];
            for (int c = 0; c < next_cluster; ++c)
                if (best < 0 || sizes[c] > sizes[best]) best = c;

            if (best >= 0 && sizes[best] >= min_pts) {
                for (std::size_t a = 0; a < cand.size(); ++a)
                    if (cluster[a] == best) admitted.push_back(cand[a]);
            } else {
                admitted = cand; // no density majority either; keep the non-clumped set
            }
        }
    }

    std::vector<double> norms;
    for (std::size_t i : admitted) norms.push_back(vec::norm2(updates[i].delta));
    const double clip = median(norms);

    std::vector<ParamVector> clipped;
    for (std::size_t i : admitted) {
        double nm = vec::norm2(updates[i].delta);
        clipped.push_back(nm > clip && nm > 0.0 ? vec::scaled(updates[i].delta, clip / nm)
                                                : updates[i].delta);
    }
    std::vector<const ParamVector*> vs;
    for (const auto& c : clipped) vs.push_back(&c);

    AggregationOutcome out;
    out.aggregate = mean_of(vs);
    out.weights.assign(n, 0.0);
    for (std::size_t i : admitted) {
        out.admitted_ids.push_back(updates[i].client_id);
        out.weights[i] = 1.0 / static_cast<double>(admitted.size());
    }
    if (sigma_noise > 0.0) {
        std::mt19937_64 eng(mix64(seed));
        std::normal_distribution<double> noise(0.0, sigma_noise);
        for (double& x : out.aggregate) x += noise(eng);
    }
    return out;
}

namespace {

struct KmeansResult {
    std::vector<int> assign;
    double wcss = std::numeric_limits<double>::infinity();
};

double sqdist(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    return (a - b).squaredNorm();
}

KmeansResult kmeans2(const Eigen::MatrixXd& points, std::uint64_t seed) {
    const std::size_t n = points.rows();
    KmeansResult best;
    for (int restart = 0; restart < 8; ++restart) {
        std::mt19937_64 eng(derive_seed(seed, {static_cast<std::uint64_t>(restart)}));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);

        // kmeans++ seeding for two centroids
        Eigen::MatrixXd centroids(2, points.cols());
        std::size_t first = pick(eng);
        centroids.row(0) = points.row(first);
        std::vector<double> w(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = sqdist(points.row(i), centroids.row(0));
            total += w[i];
        }
        std::size_t second;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(eng), acc = 0.0;
            second = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += w[i];
                if (r <= acc) {
                    second = i;
                    break;
                }
            }
        } else {
            second = (first + 1) % n;
        }
        centroids.row(1) = points.row(second);

        std::vector<int> assign(n, 0);
        for (int iter = 0; iter < 100; ++iter) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                double d0 = sqdist(points.row(i), centroids.row(0));
                double d1 = sqdist(points.row(i), centroids.row(1));
                int a = d1 < d0 ? 1 : 0;
                if (a != assign[i]) {
                    assign[i] = a;
                    changed = true;
                }
            }
            for (int c = 0; c < 2; ++c) {
                Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(points.cols());
                std::size_t count = 0;
                for (std::size_t i = 0; i < n; ++i)
                    if (assign[i] == c) {
                        sum += points.row(i);
                        ++count;
                    }
                if (count > 0) {
                    centroids.row(c) = sum / static_cast<double>(count);
                } else {
                    // Re-seed an empty cluster at the point farthest from the other centroid.
                    std::size_t far = 0;
                    double fd = -1.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        double d = sqdist(points.row(i), centroids.row(1 - c));
                        if (d > fd) {
                            fd = d;
                            far = i;
                        }
                    }
                    centroids.row(c) = points.row(far);
                }
            }
            if (!changed) break;
        }
        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i) wcss += sqdist(points.row(i), centroids.row(assign[i]));
        if (wcss < best.wcss) {
            best.wcss = wcss;
            best.assign = assign;
        }
    }
    return best;
}

} // namespace

AggregationOutcome agg_rflbat(const std::vector<observed_update>& updates, int k_dims,
                              std::uint64_t seed) {
    require_nonempty(updates, "agg_rflbat");
    const std::size_t n = updates.size();
    if (n < 3)
        throw std::invalid_argument("agg_rflbat: need at least 3 updates");
    if (k_dims < 1)
        throw std::invalid_argument("agg_rflbat: k_dims must be >= 1");
    const std::size_t d = updates.front().delta.size();

    Eigen::MatrixXd x(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) x(i, j) = updates[i].delta[j];
    Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    // Snapshot PCA through the n x n Gram matrix: for eigenpair (lambda_i, u_i)
    // the projection of the rows onto principal component i is sqrt(lambda_i) u_i.
    Eigen::MatrixXd gram = x * x.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_dims), n);
    Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(n, k);
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t src = n - 1 - c; // eigenvalues come sorted ascending
        double lambda = std::max(es.eigenvalues()(src), 0.0);
        proj.col(c) = std::sqrt(lambda) * es.eigenvectors().col(src);
    }

    KmeansResult km = kmeans2(proj, derive_seed(seed, {kRflbatStream}));
    std::size_t size0 = 0;
    for (int a : km.assign)
        if (a == 0) ++size0;
    std::size_t size1 = n - size0;

    int keep;
    if (size0 != size1) {
        keep = size0 > size1 ? 0 : 1;
    } else {
        // Tie-break on mean intra-cluster pairwise distance in projected space.
        double mean_d[2] = {0.0, 0.0};
        for (int c = 0; c < 2; ++c) {
            double sum = 0.0;
            std::size_t pairs = 0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (km.assign[i] == c && km.assign[j] == c) {
                        sum += std::sqrt(sqdist(proj.row(i), proj.row(j)));
                        ++pairs;
                    }
            mean_d[c] = pairs > 0 ? sum / static_cast<double>(pairs) : 0.0;
        }
        keep = mean_d[0] <= mean_d[1] ? 0 : 1;
    }

    std::vector<const ParamVector*> vs;
    AggregationOutcome out;
    out.weights.assign(n, 0.0);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (km.assign[i] == keep) ++kept;
    for (std::size_t i = 0; i < n; ++i)
        if (km.assign[i] == keep) {
            vs.push_back(&updates[i].delta);
            out.admitted_ids.push_back(updates[i].client_id);
            out.weights[i] = 1.0 / static_cast<double>(kept);
        }
    out.aggregate = mean_of(vs);
    return out;
}

AggregationOutcome agg_foolsgold(const std::vector<observed_update>& updates,
                                 const std::map<int, ParamVector>& cumulative_history) {
    require_nonempty(updates, "agg_foolsgold");
    const std::size_t n = updates.size();

    std::vector<const ParamVector*> hist;
    for (const auto& u : updates) {
        auto it = cumulative_history.find(u.client_id);
        if (it == cumulative_history.end())
            throw std::invalid_argument("agg_foolsgold: no history for client " +
                                        std::to_string(u.client_id));
        vec::check_same_length(updates.front().delta, it->second, "agg_foolsgold");
        hist.push_back(&it->second);
    }

    std::vector<std::vector<double>> cs(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            auto c = vec::cosine(*hist[i], *hist[j]);
            cs[i][j] = cs[j][i] = c.value_or(0.0);
        }

    std::vector<double> vmax(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double m = -1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) m = std::max(m, cs[i][j]);
        vmax[i] = n > 1 ? m : 0.0;
    }

    // Pardoning: scale cs_ij down by v_i/v_j when client j looks more sybil-like.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && vmax[j] > vmax[i] && vmax[j] > 1e-12)
                cs[i][j] *= vmax[i] / vmax[j];

    std::vector<double> wv(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double m = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) m = std::max(m, cs[i][j]);
        wv[i] = std::clamp(1.0 - m, 0.0, 1.0);
    }

    // Original FoolsGold sharpening: rescale by the max, then a shifted logit
    // clipped back into [0,1].
    double wmax = *std::max_element(wv.begin(), wv.end());
    if (wmax > 0.0)
        for (double& w : wv) w /= wmax;
    for (double& w : wv) {
        if (w >= 1.0) w = 0.99;
        w = w <= 0.0 ? 0.0 : std::log(w / (1.0 - w)) + 0.5;
        w = std::clamp(w, 0.0, 1.0);
    }

    double wsum = 0.0;
    for (double w : wv) wsum += w;

    AggregationOutcome out;
    out.weights = wv;
    for (const auto& u : updates) out.admitted_ids.push_back(u.client_id);
    out.aggregate.assign(updates.front().delta.size(), 0.0);
    if (wsum > 1e-12) {
        for (std::size_t i = 0; i < n; ++i) vec::axpy(out.aggregate, wv[i] / wsum, updates[i].delta);
    } else {
        std::vector<const ParamVector*> vs;
        for (const auto& u : updates) vs.push_back(&u.delta);
        out.aggregate = mean_of(vs);
    }
    return out;
}

} // namespace darkfed::defense
