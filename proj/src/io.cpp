#include "hpnet/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hpnet/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian; byte swapping is not implemented");

namespace hpnet {

namespace {

constexpr char kMagic[8] = {'H', 'P', 'N', 'E', 'T', 'W', 'T', 'S'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void get_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw PersistenceError("weight file truncated or unreadable");
}

void put_u32(std::ostream& os, std::uint32_t v) { put_bytes(os, &v, sizeof v); }
void put_i64(std::ostream& os, std::int64_t v) { put_bytes(os, &v, sizeof v); }
void put_f64(std::ostream& os, double v) { put_bytes(os, &v, sizeof v); }

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v;
    get_bytes(is, &v, sizeof v);
    return v;
}
std::int64_t get_i64(std::istream& is) {
    std::int64_t v;
    get_bytes(is, &v, sizeof v);
    return v;
}
double get_f64(std::istream& is) {
    double v;
    get_bytes(is, &v, sizeof v);
    return v;
}

void put_matrix(std::ostream& os, const Mat& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(os, m(r, c));
}

void get_matrix(std::istream& is, Mat& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get_f64(is);
}

void put_vector(std::ostream& os, const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(os, v(i));
}

void get_vector(std::istream& is, Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = get_f64(is);
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

void save_state(const NetworkState& state, const std::filesystem::path& path) {
    std::ostringstream os(std::ios::binary);
    put_bytes(os, kMagic, sizeof kMagic);
    put_u32(os, kVersion);

    const NetworkConfig& c = state.config;
    put_i64(os, c.n_input);
    put_i64(os, c.n_output);
    put_i64(os, c.n_d);
    put_i64(os, c.n_v);
    put_i64(os, c.n_pb_d);
    put_i64(os, c.n_pb_v);
    put_u32(os, c.same_stream_pb ? 1 : 0);
    put_f64(os, c.eta_dorsal);
    put_f64(os, c.eta_ventral);
    put_f64(os, c.eta_min);
    put_f64(os, c.eta_max);
    put_f64(os, c.xi_plus);
    put_f64(os, c.xi_minus);
    put_f64(os, c.m_gamma);
    put_f64(os, c.gamma_recognition);
    put_f64(os, c.weight_init_range);

    put_vector(os, state.rho_d);
    put_vector(os, state.rho_v);
    for (const Mat* m : state.weights.all()) put_matrix(os, *m);
    for (const Mat* m : state.lr.all()) put_matrix(os, *m);
    for (const Mat* m : state.prev_grad.all()) put_matrix(os, *m);

    atomic_write_text(path, os.str());
}

NetworkState load_state(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw PersistenceError("cannot open weight file: " + path.string());

    char magic[8];
    get_bytes(is, magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw PersistenceError("not a weight file (bad magic): " + path.string());
    const std::uint32_t version = get_u32(is);
    if (version != kVersion)
        throw PersistenceError("unsupported weight file version " + std::to_string(version) +
                               " (expected " + std::to_string(kVersion) + ")");

    NetworkConfig c;
    c.n_input = static_cast<int>(get_i64(is));
    c.n_output = static_cast<int>(get_i64(is));
    c.n_d = static_cast<int>(get_i64(is));
    c.n_v = static_cast<int>(get_i64(is));
    c.n_pb_d = static_cast<int>(get_i64(is));
    c.n_pb_v = static_cast<int>(get_i64(is));
    c.same_stream_pb = get_u32(is) != 0;
    c.eta_dorsal = get_f64(is);
    c.eta_ventral = get_f64(is);
    c.eta_min = get_f64(is);
    c.eta_max = get_f64(is);
    c.xi_plus = get_f64(is);
    c.xi_minus = get_f64(is);
    c.m_gamma = get_f64(is);
    c.gamma_recognition = get_f64(is);
    c.weight_init_range = get_f64(is);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw PersistenceError(std::string("corrupt weight file: ") + e.what());
    }

    NetworkState st;
    st.config = c;
    st.weights = WeightSet::shaped(c);
    st.lr = WeightSet::shaped(c);
    st.prev_grad = WeightSet::shaped(c);
    st.rho_d = Vec::Zero(c.n_pb_d);
    st.rho_v = Vec::Zero(c.n_pb_v);

    get_vector(is, st.rho_d);
    get_vector(is, st.rho_v);
    for (Mat* m : st.weights.all()) get_matrix(is, *m);
    for (Mat* m : st.lr.all()) get_matrix(is, *m);
    for (Mat* m : st.prev_grad.all()) get_matrix(is, *m);
    return st;
}

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw PersistenceError("cannot write: " + tmp.string());
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw PersistenceError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_sequence_csv(const LabeledSequence& seq, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "t_index";
    const Eigen::Index n = seq.frames.empty() ? 0 : seq.frames.front().values.size();
    for (Eigen::Index i = 0; i < n; ++i) os << ",in" << i;
    os << ",shape,color,repeat\n";
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        os << t;
        for (Eigen::Index i = 0; i < n; ++i) os << "," << fmt(seq.frames[t].values(i));
        os << "," << seq.shape << "," << seq.color << "," << seq.repeat << "\n";
    }
    atomic_write_text(path, os.str());
}

LabeledSequence read_sequence_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open dataset file: " + path.string());

    std::string line;
    if (!std::getline(is, line)) throw DataError("empty dataset file: " + path.string());
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string field;
        while (std::getline(hs, field, ',')) header.push_back(field);
    }
    if (header.size() < 5 || header.front() != "t_index")
        throw DataError("bad dataset header in " + path.string());
    const std::size_t n = header.size() - 4;  // t_index + n inputs + shape,color,repeat

    LabeledSequence seq;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != header.size())
            throw DataError("bad row in " + path.string() + ": " + line);
        InputFrame f;
        f.values = Vec::Zero(static_cast<Eigen::Index>(n));
        try {
            for (std::size_t i = 0; i < n; ++i)
                f.values(static_cast<Eigen::Index>(i)) = std::stod(fields[1 + i]);
            seq.shape = fields[1 + n];
            seq.color = fields[2 + n];
            seq.repeat = std::stoi(fields[3 + n]);
        } catch (const std::exception&) {
            throw DataError("unparseable row in " + path.string() + ": " + line);
        }
        seq.frames.push_back(std::move(f));
    }
    if (seq.frames.empty()) throw DataError("dataset file has no rows: " + path.string());
    return seq;
}

void write_pb_table_csv(const PBTable& table, const std::filesystem::path& path) {
    std::ostringstream os;
    const Eigen::Index nd = table.empty() ? 1 : table.front().rho_d.size();
    const Eigen::Index nv = table.empty() ? 1 : table.front().rho_v.size();
    os << "label,shape,color,repeat";
    for (Eigen::Index i = 0; i < nd; ++i) os << ",rho_d_" << i;
    for (Eigen::Index i = 0; i < nv; ++i) os << ",rho_v_" << i;
    for (Eigen::Index i = 0; i < nd; ++i) os << ",pb_d_" << i;
    for (Eigen::Index i = 0; i < nv; ++i) os << ",pb_v_" << i;
    os << "\n";
    for (const PBEntry& e : table) {
        os << e.label() << "," << e.shape << "," << e.color << "," << e.repeat;
        for (Eigen::Index i = 0; i < nd; ++i) os << "," << fmt(e.rho_d(i));
        for (Eigen::Index i = 0; i < nv; ++i) os << "," << fmt(e.rho_v(i));
        for (Eigen::Index i = 0; i < nd; ++i) os << "," << fmt(transfer(e.rho_d(i)));
        for (Eigen::Index i = 0; i < nv; ++i) os << "," << fmt(transfer(e.rho_v(i)));
        os << "\n";
    }
    atomic_write_text(path, os.str());
}

void write_cost_curve_csv(const std::vector<double>& curve, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "epoch,cost\n";
    for (std::size_t e = 0; e < curve.size(); ++e) os << (e + 1) << "," << fmt(curve[e]) << "\n";
    atomic_write_text(path, os.str());
}

void write_recognition_trace_csv(
    const std::vector<std::pair<std::string, RecognitionTrace>>& traces,
    const std::filesystem::path& path) {
    std::ostringstream os;
    Eigen::Index nd = 1, nv = 1;
    for (const auto& [_, tr] : traces) {
        if (!tr.rho_d_history.empty()) {
            nd = tr.rho_d_history.front().size();
            nv = tr.rho_v_history.front().size();
            break;
        }
    }
    os << "sequence,epoch";
    for (Eigen::Index i = 0; i < nd; ++i) os << ",rho_d_" << i;
    for (Eigen::Index i = 0; i < nv; ++i) os << ",rho_v_" << i;
    for (Eigen::Index i = 0; i < nd; ++i) os << ",pb_d_" << i;
    for (Eigen::Index i = 0; i < nv; ++i) os << ",pb_v_" << i;
    os << "\n";
    for (const auto& [label, tr] : traces) {
        for (std::size_t e = 0; e < tr.rho_d_history.size(); ++e) {
            os << label << "," << (e + 1);
            const Vec& rd = tr.rho_d_history[e];
            const Vec& rv = tr.rho_v_history[e];
            for (Eigen::Index i = 0; i < rd.size(); ++i) os << "," << fmt(rd(i));
            for (Eigen::Index i = 0; i < rv.size(); ++i) os << "," << fmt(rv(i));
            for (Eigen::Index i = 0; i < rd.size(); ++i) os << "," << fmt(transfer(rd(i)));
            for (Eigen::Index i = 0; i < rv.size(); ++i) os << "," << fmt(transfer(rv(i)));
            os << "\n";
        }
    }
    atomic_write_text(path, os.str());
}

void write_prediction_trace_csv(const std::vector<PredictionRecord>& records,
                                const std::filesystem::path& path) {
    std::ostringstream os;
    Eigen::Index n = 4;
    if (!records.empty() && !records.front().predicted.empty())
        n = records.front().predicted.front().values.size();
    os << "sequence,step";
    for (Eigen::Index i = 0; i < n; ++i) os << ",pred_" << i;
    for (Eigen::Index i = 0; i < n; ++i) os << ",true_" << i;
    os << "\n";
    for (const PredictionRecord& rec : records) {
        const std::size_t len = std::min(rec.predicted.size(), rec.truth.size());
        for (std::size_t t = 0; t < len; ++t) {
            os << rec.label << "," << t;
            for (Eigen::Index i = 0; i < n; ++i) os << "," << fmt(rec.predicted[t].values(i));
            for (Eigen::Index i = 0; i < n; ++i) os << "," << fmt(rec.truth[t].values(i));
            os << "\n";
        }
    }
    atomic_write_text(path, os.str());
}

}  // namespace hpnet
