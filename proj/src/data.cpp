#include "cmm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cmm/error.hpp"
#include "cmm/rng.hpp"

namespace cmm {

namespace {

constexpr std::uint64_t kMeanStream = 0xc1a55ULL;
constexpr std::uint64_t kSampleStream = 0x5a3b1eULL;
constexpr std::uint64_t kDomainStream = 0xd0313ULL;

// Class means sit on a sphere whose radius tracks the noise level so tasks
// stay learnable but imperfect; spread 0 keeps a unit radius so distinct
// classes remain distinct.
double mean_radius(double spread) { return spread > 0.0 ? 4.0 * spread : 1.0; }

std::vector<double> class_mean(std::uint64_t seed, int class_id, std::size_t dim,
                               double spread) {
    Rng rng(mix_seed(seed, mix_seed(kMeanStream, static_cast<std::uint64_t>(class_id))));
    std::vector<double> mu(dim);
    double norm = 0.0;
    for (double& v : mu) {
        v = rng.normal();
        norm += v * v;
    }
    norm = std::sqrt(norm);
    const double scale = mean_radius(spread) / (norm > 0.0 ? norm : 1.0);
    for (double& v : mu) v *= scale;
    return mu;
}

void split_counts(std::size_t n, std::size_t& n_train, std::size_t& n_test) {
    if (n < 2)
        throw UsageError("samples_per_class must be >= 2 so both splits are non-empty");
    n_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.2 * n)));
    if (n_test >= n) n_test = n - 1;
    n_train = n - n_test;
}

struct RawTask {
    std::vector<std::vector<double>> train_x, test_x;
    std::vector<int> train_y, test_y;
};

TaskDataset finish_task(RawTask&& raw, std::size_t dim) {
    TaskDataset t;
    t.train.x = Matrix(raw.train_x.size(), dim);
    for (std::size_t i = 0; i < raw.train_x.size(); ++i)
        for (std::size_t j = 0; j < dim; ++j) t.train.x(i, j) = raw.train_x[i][j];
    t.train.y = std::move(raw.train_y);
    t.test.x = Matrix(raw.test_x.size(), dim);
    for (std::size_t i = 0; i < raw.test_x.size(); ++i)
        for (std::size_t j = 0; j < dim; ++j) t.test.x(i, j) = raw.test_x[i][j];
    t.test.y = std::move(raw.test_y);

    std::set<int> classes(t.train.y.begin(), t.train.y.end());
    classes.insert(t.test.y.begin(), t.test.y.end());
    t.classes.assign(classes.begin(), classes.end());
    return t;
}

void format_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

} // namespace

void TaskDataset::validate() const {
    if (train.x.rows() != train.y.size() || test.x.rows() != test.y.size())
        throw DataError("sample/label count mismatch");
    if (!std::is_sorted(classes.begin(), classes.end()) ||
        std::adjacent_find(classes.begin(), classes.end()) != classes.end())
        throw DataError("task class list must be sorted and unique");
    for (int c : classes) {
        const auto has = [c](const std::vector<int>& ys) {
            return std::find(ys.begin(), ys.end(), c) != ys.end();
        };
        if (!has(train.y) || !has(test.y))
            throw DataError("class " + std::to_string(c) +
                            " needs at least one train and one test sample");
    }
    const auto known = [this](const std::vector<int>& ys) {
        for (int y : ys)
            if (!std::binary_search(classes.begin(), classes.end(), y))
                throw DataError("label " + std::to_string(y) +
                                " not in the task's class set");
    };
    known(train.y);
    known(test.y);
}

void TaskSequence::validate() const {
    if (tasks.empty()) throw DataError("task sequence is empty");
    for (const TaskDataset& t : tasks) t.validate();

    if (scenario == Scenario::cil) {
        std::set<int> seen;
        for (std::size_t i = 0; i < tasks.size(); ++i)
            for (int c : tasks[i].classes)
                if (!seen.insert(c).second)
                    throw DataError("CIL violation: class " + std::to_string(c) +
                                    " appears in more than one task");
        if (std::vector<int>(seen.begin(), seen.end()) != global_classes)
            throw DataError("global class set does not match the union of task classes");
    } else {
        for (std::size_t i = 0; i < tasks.size(); ++i)
            if (tasks[i].classes != global_classes)
                throw DataError("DIL violation: task " + std::to_string(i) +
                                " label space differs from the shared one");
    }
}

std::size_t TaskSequence::input_dim() const {
    if (tasks.empty()) throw DataError("task sequence is empty");
    return tasks.front().train.x.cols();
}

TaskSequence gen_cil(std::uint64_t seed, std::size_t num_tasks,
                     std::size_t classes_per_task, std::size_t samples_per_class,
                     std::size_t input_dim, double spread) {
    if (num_tasks < 1 || classes_per_task < 1 || input_dim < 1)
        throw UsageError("gen_cil counts must be >= 1");
    if (spread < 0.0) throw UsageError("spread must be >= 0");
    std::size_t n_train = 0, n_test = 0;
    split_counts(samples_per_class, n_train, n_test);

    TaskSequence seq;
    seq.scenario = Scenario::cil;
    for (std::size_t t = 0; t < num_tasks; ++t) {
        RawTask raw;
        for (std::size_t k = 0; k < classes_per_task; ++k) {
            const int cls = static_cast<int>(t * classes_per_task + k);
            const std::vector<double> mu = class_mean(seed, cls, input_dim, spread);
            Rng rng(mix_seed(seed,
                             mix_seed(kSampleStream, static_cast<std::uint64_t>(cls))));
            for (std::size_t s = 0; s < samples_per_class; ++s) {
                std::vector<double> x(input_dim);
                for (std::size_t j = 0; j < input_dim; ++j)
                    x[j] = mu[j] + spread * rng.normal();
                if (s < n_train) {
                    raw.train_x.push_back(std::move(x));
                    raw.train_y.push_back(cls);
                } else {
                    raw.test_x.push_back(std::move(x));
                    raw.test_y.push_back(cls);
                }
            }
            seq.global_classes.push_back(cls);
        }
        seq.tasks.push_back(finish_task(std::move(raw), input_dim));
    }
    seq.validate();
    return seq;
}

Matrix dil_rotation(std::uint64_t seed, std::size_t domain, std::size_t dim,
                    double domain_shift) {
    Rng rng(mix_seed(seed, mix_seed(kDomainStream, domain)));
    Matrix r(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) r(i, i) = 1.0;
    if (dim < 2) return r;
    for (std::size_t k = 0; k < dim; ++k) {
        const std::size_t i = rng.integer(dim);
        std::size_t j = rng.integer(dim - 1);
        if (j >= i) ++j;
        const double angle = domain_shift * rng.uniform(-1.0, 1.0);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        for (std::size_t col = 0; col < dim; ++col) {
            const double ri = r(i, col);
            const double rj = r(j, col);
            r(i, col) = c * ri - s * rj;
            r(j, col) = s * ri + c * rj;
        }
    }
    return r;
}

TaskSequence gen_dil(std::uint64_t seed, std::size_t num_domains,
                     std::size_t num_classes, std::size_t samples_per_class,
                     std::size_t input_dim, double spread, double domain_shift) {
    if (num_domains < 1 || num_classes < 1 || input_dim < 1)
        throw UsageError("gen_dil counts must be >= 1");
    if (spread < 0.0) throw UsageError("spread must be >= 0");
    std::size_t n_train = 0, n_test = 0;
    split_counts(samples_per_class, n_train, n_test);

    TaskSequence seq;
    seq.scenario = Scenario::dil;
    for (std::size_t c = 0; c < num_classes; ++c)
        seq.global_classes.push_back(static_cast<int>(c));

    for (std::size_t d = 0; d < num_domains; ++d) {
        const Matrix rot = dil_rotation(seed, d, input_dim, domain_shift);
        Rng trng(mix_seed(seed, mix_seed(kDomainStream + 1, d)));
        std::vector<double> shift(input_dim);
        double norm = 0.0;
        for (double& v : shift) {
            v = trng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (double& v : shift) v *= domain_shift / (norm > 0.0 ? norm : 1.0);

        RawTask raw;
        for (std::size_t c = 0; c < num_classes; ++c) {
            const int cls = static_cast<int>(c);
            const std::vector<double> mu = class_mean(seed, cls, input_dim, spread);
            Rng rng(mix_seed(seed, mix_seed(mix_seed(kSampleStream, d),
                                            static_cast<std::uint64_t>(cls))));
            for (std::size_t s = 0; s < samples_per_class; ++s) {
                std::vector<double> raw_x(input_dim), x(input_dim);
                for (std::size_t j = 0; j < input_dim; ++j)
                    raw_x[j] = mu[j] + spread * rng.normal();
                for (std::size_t i = 0; i < input_dim; ++i) {
                    double v = shift[i];
                    for (std::size_t j = 0; j < input_dim; ++j)
                        v += rot(i, j) * raw_x[j];
                    x[i] = v;
                }
                if (s < n_train) {
                    raw.train_x.push_back(std::move(x));
                    raw.train_y.push_back(cls);
                } else {
                    raw.test_x.push_back(std::move(x));
                    raw.test_y.push_back(cls);
                }
            }
        }
        seq.tasks.push_back(finish_task(std::move(raw), input_dim));
    }
    seq.validate();
    return seq;
}

TaskSequence load_csv(const std::string& path, Scenario scenario) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file '" + path + "'");

    std::string line;
    std::size_t line_no = 0;

    auto fail = [&](const std::string& why) -> void {
        throw DataError(path + ":" + std::to_string(line_no) + ": " + why);
    };

    if (!std::getline(in, line)) fail("missing header row");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 4 || header[0] != "task" || header[1] != "split" ||
        header[2] != "label")
        fail("header must be task,split,label,f0,...");
    const std::size_t dim = header.size() - 3;
    for (std::size_t j = 0; j < dim; ++j)
        if (header[3 + j] != "f" + std::to_string(j))
            fail("feature column " + std::to_string(j) + " must be named f" +
                 std::to_string(j));

    std::vector<RawTask> raw;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 3 + dim)
            fail("expected " + std::to_string(3 + dim) + " columns, found " +
                 std::to_string(cells.size()));

        std::size_t task = 0;
        {
            auto [p, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), task);
            if (ec != std::errc{} || p != cells[0].data() + cells[0].size())
                fail("bad task index '" + cells[0] + "'");
        }
        const bool is_train = cells[1] == "train";
        if (!is_train && cells[1] != "test") fail("split must be train or test");
        int label = 0;
        {
            auto [p, ec] = std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(), label);
            if (ec != std::errc{} || p != cells[2].data() + cells[2].size())
                fail("bad label '" + cells[2] + "'");
        }
        std::vector<double> x(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            const std::string& c = cells[3 + j];
            auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), x[j]);
            if (ec != std::errc{} || p != c.data() + c.size())
                fail("bad float '" + c + "' in column f" + std::to_string(j));
        }

        if (task >= raw.size()) raw.resize(task + 1);
        if (is_train) {
            raw[task].train_x.push_back(std::move(x));
            raw[task].train_y.push_back(label);
        } else {
            raw[task].test_x.push_back(std::move(x));
            raw[task].test_y.push_back(label);
        }
    }
    if (raw.empty()) throw DataError(path + ": no samples");

    TaskSequence seq;
    seq.scenario = scenario;
    std::set<int> all;
    for (std::size_t t = 0; t < raw.size(); ++t) {
        if (raw[t].train_x.empty() && raw[t].test_x.empty())
            throw DataError(path + ": task " + std::to_string(t) + " has no samples");
        seq.tasks.push_back(finish_task(std::move(raw[t]), dim));
        all.insert(seq.tasks.back().classes.begin(), seq.tasks.back().classes.end());
    }
    seq.global_classes.assign(all.begin(), all.end());
    seq.validate();
    return seq;
}

void save_csv(const TaskSequence& seq, const std::string& path) {
    seq.validate();
    std::string out = "task,split,label";
    const std::size_t dim = seq.input_dim();
    for (std::size_t j = 0; j < dim; ++j) out += ",f" + std::to_string(j);
    out += "\n";

    const auto emit = [&](std::size_t task, const char* split, const SplitData& s) {
        for (std::size_t i = 0; i < s.x.rows(); ++i) {
            out += std::to_string(task);
            out += ',';
            out += split;
            out += ',';
            out += std::to_string(s.y[i]);
            for (std::size_t j = 0; j < dim; ++j) {
                out += ',';
                format_double(out, s.x(i, j));
            }
            out += '\n';
        }
    };
    for (std::size_t t = 0; t < seq.tasks.size(); ++t) {
        emit(t, "train", seq.tasks[t].train);
        emit(t, "test", seq.tasks[t].test);
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write dataset file '" + path + "'");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("failed writing dataset file '" + path + "'");
}

} // namespace cmm
