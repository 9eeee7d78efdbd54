#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vec.hpp"

namespace darkfed::defense {

struct observed_update {
    int client_id = 0;
    ParamVector delta;
};

struct AggregationOutcome {
    ParamVector aggregate;
    std::vector<int> admitted_ids;
    std::vector<double> weights; // aligned with the input order
};

// Unweighted element-wise mean; everything admitted.
AggregationOutcome agg_fedavg(const std::vector<observed_update>& updates);

// Updates with L2 norm above tau are rescaled to norm tau (direction kept),
// then averaged. Everything admitted.
AggregationOutcome agg_norm_clipping(const std::vector<observed_update>& updates, double tau);

// Direction-based filter in the FLAME family, reconstructed at desk scale as
// two-level density clustering on pairwise cosine distances (undefined
// directions count as distance 1):
//   1. tight clumps: connected components at a quarter of the median
//      pairwise distance. A clump holding the floor(n/2)+1 majority IS the majority
//      cluster (covers the all-identical round); smaller clumps are the
//      sybil signature and are rejected outright.
//   2. remaining updates: DBSCAN with minPts = floor(n/2)+1 and
//      eps = 1.2 x the first-quartile remaining distance; the largest
//      cluster is the majority cluster and points outside it are rejected
//      (no qualifying cluster: everything remaining is admitted).
//   3. admitted updates are clipped to the median admitted norm
//   4. mean, plus isotropic Gaussian noise of scale sigma_noise (default 0)
// The original runs HDBSCAN with min cluster size n/2+1 and adds adaptive
// noise; this keeps its contract (majority cluster, clip, noise)
// deterministic at ten-updates-per-round scale.
AggregationOutcome agg_flame(const std::vector<observed_update>& updates, double sigma_noise,
                             std::uint64_t seed);

// PCA + clustering filter in the RFLBAT family: project the centered update
// matrix onto its top-k principal components, 2-means in the projected
// space, keep the larger cluster (tie: lower mean intra-cluster distance),
// average the kept updates. The original selects k and cluster count with
// silhouette heuristics; fixed k and 2-means keep the desk-scale rule
// deterministic.
AggregationOutcome agg_rflbat(const std::vector<observed_update>& updates, int k_dims,
                              std::uint64_t seed);

// FoolsGold re-weighting over cumulative per-client histories: pairwise
// cosine similarity, pardoning rescale, weight 1 - max similarity, then the
// original logit sharpening; aggregate is the weight-normalized mean.
AggregationOutcome agg_foolsgold(const std::vector<observed_update>& updates,
                                 const std::map<int, ParamVector>& cumulative_history);

} // namespace darkfed::defense
