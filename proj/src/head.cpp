#include "cmm/head.hpp"

#include <algorithm>
#include <cmath>

#include "cmm/error.hpp"
#include "cmm/rng.hpp"

namespace cmm {

namespace {

constexpr double kNormFloor = 1e-12; // added to norms so zero embeddings stay finite

double row_norm(const double* p, std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += p[j] * p[j];
    return std::sqrt(s);
}

void normalize_row(double* p, std::size_t n) {
    const double inv = 1.0 / (row_norm(p, n) + kNormFloor);
    for (std::size_t j = 0; j < n; ++j) p[j] *= inv;
}

} // namespace

FrozenHead::FrozenHead(Matrix embeddings, std::vector<int> class_ids, double temperature)
    : embeddings_(std::move(embeddings)),
      class_ids_(std::move(class_ids)),
      temperature_(temperature) {
    if (temperature_ <= 0.0)
        throw UsageError("head temperature must be positive");
    if (embeddings_.rows() != class_ids_.size())
        throw ShapeError("class embedding row count does not match class id count");
    for (std::size_t k = 0; k < embeddings_.rows(); ++k) {
        const double n = row_norm(embeddings_.row(k), embeddings_.cols());
        if (std::abs(n - 1.0) > 1e-12)
            throw ShapeError("class embedding row " + std::to_string(k) +
                             " is not unit-normalized");
    }
    for (std::size_t k = 1; k < class_ids_.size(); ++k)
        if (class_ids_[k] <= class_ids_[k - 1])
            throw UsageError("head class ids must be strictly increasing");
}

FrozenHead FrozenHead::seeded(const std::vector<int>& class_ids, std::size_t embed_dim,
                              double temperature, std::uint64_t seed) {
    std::vector<int> ids = class_ids;
    std::sort(ids.begin(), ids.end());
    Matrix e(ids.size(), embed_dim);
    for (std::size_t k = 0; k < ids.size(); ++k) {
        Rng rng(mix_seed(seed, 0x8ead0000ULL + static_cast<std::uint64_t>(ids[k])));
        for (std::size_t j = 0; j < embed_dim; ++j) e(k, j) = rng.normal();
        normalize_row(e.row(k), embed_dim);
    }
    return FrozenHead(std::move(e), std::move(ids), temperature);
}

FrozenHead FrozenHead::subset(const std::vector<int>& class_ids) const {
    std::vector<int> ids = class_ids;
    std::sort(ids.begin(), ids.end());
    Matrix e(ids.size(), embed_dim());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const std::size_t r = row_of(ids[k]);
        for (std::size_t j = 0; j < embed_dim(); ++j) e(k, j) = embeddings_(r, j);
    }
    return FrozenHead(std::move(e), std::move(ids), temperature_);
}

std::size_t FrozenHead::row_of(int class_id) const {
    const auto it = std::lower_bound(class_ids_.begin(), class_ids_.end(), class_id);
    if (it == class_ids_.end() || *it != class_id)
        throw DataError("class id " + std::to_string(class_id) + " not present in head");
    return static_cast<std::size_t>(it - class_ids_.begin());
}

Matrix FrozenHead::class_probabilities(const Matrix& z) const {
    if (z.cols() != embed_dim())
        throw ShapeError("embedding width " + std::to_string(z.cols()) +
                         " does not match head embed_dim " + std::to_string(embed_dim()));
    const std::size_t k_classes = num_classes();
    Matrix p(z.rows(), k_classes);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const double* zi = z.row(i);
        const double denom = row_norm(zi, z.cols()) + kNormFloor;
        double max_logit = -1e300;
        for (std::size_t k = 0; k < k_classes; ++k) {
            double dot = 0.0;
            for (std::size_t j = 0; j < z.cols(); ++j) dot += zi[j] * embeddings_(k, j);
            const double logit = (dot / denom) / temperature_;
            p(i, k) = logit;
            max_logit = std::max(max_logit, logit);
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < k_classes; ++k) {
            p(i, k) = std::exp(p(i, k) - max_logit);
            sum += p(i, k);
        }
        for (std::size_t k = 0; k < k_classes; ++k) p(i, k) /= sum;
    }
    return p;
}

FrozenHead::LossResult FrozenHead::cross_entropy(const Matrix& z,
                                                 const std::vector<int>& labels) const {
    if (labels.size() != z.rows())
        throw DataError("label count does not match batch size");
    const std::size_t batch = z.rows();
    const std::size_t dim = z.cols();
    const Matrix p = class_probabilities(z);

    LossResult out;
    out.dz = Matrix(batch, dim);
    double loss = 0.0;
    const double inv_batch = 1.0 / static_cast<double>(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t y = row_of(labels[i]);
        loss += -std::log(p(i, y));

        const double* zi = z.row(i);
        const double norm = row_norm(zi, dim);
        const double denom = norm + kNormFloor;
        // dL/ds_k for the mean loss, then chain through the cosine similarity
        // s_k = (z . e_k) / (|z| + eps).
        for (std::size_t k = 0; k < num_classes(); ++k) {
            const double ds = (p(i, k) - (k == y ? 1.0 : 0.0)) / temperature_ * inv_batch;
            double dot = 0.0;
            for (std::size_t j = 0; j < dim; ++j) dot += zi[j] * embeddings_(k, j);
            const double a = ds / denom;
            const double b = (norm > 0.0) ? ds * dot / (denom * denom * norm) : 0.0;
            for (std::size_t j = 0; j < dim; ++j)
                out.dz(i, j) += a * embeddings_(k, j) - b * zi[j];
        }
    }
    out.loss = loss * inv_batch;
    return out;
}

double FrozenHead::mean_cross_entropy(const Matrix& z, const std::vector<int>& labels) const {
    if (labels.size() != z.rows())
        throw DataError("label count does not match batch size");
    const Matrix p = class_probabilities(z);
    double loss = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) loss += -std::log(p(i, row_of(labels[i])));
    return loss / static_cast<double>(z.rows());
}

void PrototypeStore::update(const Matrix& z, const std::vector<int>& labels,
                            int task_index) {
    if (labels.size() != z.rows())
        throw DataError("label count does not match embedding count");
    std::map<int, std::pair<std::vector<double>, double>> sums;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        auto& [sum, n] = sums[labels[i]];
        if (sum.empty()) sum.assign(z.cols(), 0.0);
        for (std::size_t j = 0; j < z.cols(); ++j) sum[j] += z(i, j);
        n += 1.0;
    }
    for (auto& [cls, sn] : sums) {
        auto& [sum, n] = sn;
        if (n <= 0.0)
            throw DataError("class " + std::to_string(cls) + " has no samples");
        for (double& v : sum) v /= n;

        auto it = entries_.find(cls);
        if (it == entries_.end()) {
            entries_[cls] = Entry{std::move(sum), n, task_index};
        } else {
            if (scenario_ == Scenario::cil)
                throw StateError("prototype for class " + std::to_string(cls) +
                                 " already written (immutable in CIL)");
            // DIL: count-weighted running mean across domains.
            Entry& e = it->second;
            const double total = e.count + n;
            for (std::size_t j = 0; j < e.mean.size(); ++j)
                e.mean[j] = (e.mean[j] * e.count + sum[j] * n) / total;
            e.count = total;
            e.task = task_index;
        }
    }
}

std::vector<double> PrototypeStore::prototype(int class_id) const {
    const auto it = entries_.find(class_id);
    if (it == entries_.end())
        throw StateError("no prototype for class " + std::to_string(class_id));
    std::vector<double> p = it->second.mean;
    normalize_row(p.data(), p.size());
    return p;
}

double PrototypeStore::sample_count(int class_id) const {
    const auto it = entries_.find(class_id);
    if (it == entries_.end())
        throw StateError("no prototype for class " + std::to_string(class_id));
    return it->second.count;
}

int PrototypeStore::provenance(int class_id) const {
    const auto it = entries_.find(class_id);
    if (it == entries_.end())
        throw StateError("no prototype for class " + std::to_string(class_id));
    return it->second.task;
}

std::vector<int> PrototypeStore::class_ids() const {
    std::vector<int> ids;
    ids.reserve(entries_.size());
    for (const auto& [cls, e] : entries_) ids.push_back(cls);
    return ids;
}

void PrototypeStore::restore(int class_id, std::vector<double> mean, double count,
                             int task_index) {
    entries_[class_id] = Entry{std::move(mean), count, task_index};
}

std::vector<int> predict_nmc(const Matrix& z, const PrototypeStore& store) {
    if (store.empty()) throw StateError("prototype store is empty");
    const std::vector<int> ids = store.class_ids();
    std::vector<std::vector<double>> protos;
    protos.reserve(ids.size());
    for (int c : ids) protos.push_back(store.prototype(c));

    std::vector<int> pred(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const double* zi = z.row(i);
        const double denom = row_norm(zi, z.cols()) + kNormFloor;
        double best = -1e300;
        int best_cls = ids.front();
        for (std::size_t k = 0; k < ids.size(); ++k) {
            double dot = 0.0;
            for (std::size_t j = 0; j < z.cols(); ++j) dot += zi[j] * protos[k][j];
            const double sim = dot / denom;
            if (sim > best) { // strict: ties keep the smaller class id
                best = sim;
                best_cls = ids[k];
            }
        }
        pred[i] = best_cls;
    }
    return pred;
}

} // namespace cmm
