#include "distgeo/io.hpp"

#include "distgeo/patch_graph.hpp"
#include "distgeo/stitching.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace distgeo {

void CoordinateTable::validate() const {
    require(coords.rows() >= 1, "CoordinateTable: need at least one row");
    require(coords.cols() == 2, "CoordinateTable: coords must be n x 2");
    require(static_cast<Eigen::Index>(ids.size()) == coords.rows(),
            "CoordinateTable: ids/coords length mismatch");
    require_finite(coords, "CoordinateTable");
    std::set<std::string> unique(ids.begin(), ids.end());
    require(unique.size() == ids.size(), "CoordinateTable: duplicate ids");
}

CoordinateTable CoordinateTable::subset(const std::vector<int>& indices) const {
    CoordinateTable out;
    out.ids.reserve(indices.size());
    out.coords.resize(static_cast<Eigen::Index>(indices.size()), 2);
    for (size_t t = 0; t < indices.size(); ++t) {
        require(indices[t] >= 0 && indices[t] < size(), "CoordinateTable: index out of range");
        out.ids.push_back(ids[indices[t]]);
        out.coords.row(static_cast<Eigen::Index>(t)) = coords.row(indices[t]);
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& path, long line) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw std::runtime_error(path + ":" + std::to_string(line) +
                                 ": malformed number '" + s + "'");
    return v;
}

long parse_long(const std::string& s, const std::string& path, long line) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0')
        throw std::runtime_error(path + ":" + std::to_string(line) +
                                 ": malformed integer '" + s + "'");
    return v;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace

std::string coordinate_table_csv(const CoordinateTable& table) {
    table.validate();
    std::string out = "id,x,y\n";
    for (int i = 0; i < table.size(); ++i) {
        out += table.ids[i];
        out += ',';
        out += fmt_double(table.coords(i, 0));
        out += ',';
        out += fmt_double(table.coords(i, 1));
        out += '\n';
    }
    return out;
}

void write_coordinate_table(const std::string& path, const CoordinateTable& table) {
    write_text_atomic(path, coordinate_table_csv(table));
}

CoordinateTable read_coordinate_table(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || split_csv_line(lines[0]) != std::vector<std::string>{"id", "x", "y"})
        throw std::runtime_error(path + ":1: expected header 'id,x,y'");
    CoordinateTable table;
    table.coords.resize(static_cast<Eigen::Index>(lines.size()) - 1, 2);
    for (size_t l = 1; l < lines.size(); ++l) {
        const auto fields = split_csv_line(lines[l]);
        if (fields.size() != 3)
            throw std::runtime_error(path + ":" + std::to_string(l + 1) +
                                     ": expected 3 fields, got " +
                                     std::to_string(fields.size()));
        table.ids.push_back(fields[0]);
        table.coords(static_cast<Eigen::Index>(l) - 1, 0) =
            parse_double(fields[1], path, static_cast<long>(l + 1));
        table.coords(static_cast<Eigen::Index>(l) - 1, 1) =
            parse_double(fields[2], path, static_cast<long>(l + 1));
    }
    table.validate();
    return table;
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& header) {
    require(static_cast<Eigen::Index>(header.size()) == m.cols(),
            "matrix_csv: header length != column count");
    std::string out;
    for (size_t c = 0; c < header.size(); ++c) {
        if (c) out += ',';
        out += header[c];
    }
    out += '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += fmt_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

Matrix read_matrix_csv(const std::string& path, std::vector<std::string>* header) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error(path + ": empty file");
    const auto head = split_csv_line(lines[0]);
    if (header) *header = head;
    Matrix m(static_cast<Eigen::Index>(lines.size()) - 1,
             static_cast<Eigen::Index>(head.size()));
    for (size_t l = 1; l < lines.size(); ++l) {
        const auto fields = split_csv_line(lines[l]);
        if (fields.size() != head.size())
            throw std::runtime_error(path + ":" + std::to_string(l + 1) +
                                     ": expected " + std::to_string(head.size()) +
                                     " fields, got " + std::to_string(fields.size()));
        for (size_t c = 0; c < fields.size(); ++c)
            m(static_cast<Eigen::Index>(l) - 1, static_cast<Eigen::Index>(c)) =
                parse_double(fields[c], path, static_cast<long>(l + 1));
    }
    return m;
}

std::string labeled_matrix_csv(const Matrix& m, const std::vector<std::string>& ids) {
    require(m.rows() == m.cols(), "labeled_matrix_csv: matrix must be square");
    require(static_cast<Eigen::Index>(ids.size()) == m.rows(),
            "labeled_matrix_csv: id count != matrix size");
    std::string out = "id";
    for (const auto& id : ids) {
        out += ',';
        out += id;
    }
    out += '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out += ids[i];
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out += ',';
            out += fmt_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

Matrix read_labeled_matrix_csv(const std::string& path, std::vector<std::string>& ids) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error(path + ": empty file");
    const auto head = split_csv_line(lines[0]);
    if (head.size() < 2)
        throw std::runtime_error(path + ":1: expected header 'id,<ids...>'");
    const size_t n = head.size() - 1;
    if (lines.size() - 1 != n)
        throw std::runtime_error(path + ": expected " + std::to_string(n) +
                                 " data rows, got " + std::to_string(lines.size() - 1));
    ids.assign(head.begin() + 1, head.end());
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (size_t l = 1; l < lines.size(); ++l) {
        const auto fields = split_csv_line(lines[l]);
        if (fields.size() != n + 1)
            throw std::runtime_error(path + ":" + std::to_string(l + 1) + ": expected " +
                                     std::to_string(n + 1) + " fields");
        if (fields[0] != ids[l - 1])
            throw std::runtime_error(path + ":" + std::to_string(l + 1) +
                                     ": row id does not match header order");
        for (size_t c = 1; c < fields.size(); ++c)
            m(static_cast<Eigen::Index>(l) - 1, static_cast<Eigen::Index>(c) - 1) =
                parse_double(fields[c], path, static_cast<long>(l + 1));
    }
    return m;
}

void write_stitched_graph(const std::string& path, const StitchedGraph& graph) {
    std::string out = "i,j,d,omega,count,spread\n";
    for (const auto& e : graph.edges) {
        out += std::to_string(e.i);
        out += ',';
        out += std::to_string(e.j);
        out += ',';
        out += fmt_double(e.d);
        out += ',';
        out += fmt_double(e.omega);
        out += ',';
        out += std::to_string(e.count);
        out += ',';
        out += fmt_double(e.spread);
        out += '\n';
    }
    write_text_atomic(path, out);
}

StitchedGraph read_stitched_graph(const std::string& path, int num_nodes) {
    const auto lines = read_lines(path);
    if (lines.empty() ||
        split_csv_line(lines[0]) !=
            std::vector<std::string>{"i", "j", "d", "omega", "count", "spread"})
        throw std::runtime_error(path + ":1: expected header 'i,j,d,omega,count,spread'");
    StitchedGraph graph;
    int max_node = -1;
    for (size_t l = 1; l < lines.size(); ++l) {
        const auto fields = split_csv_line(lines[l]);
        if (fields.size() != 6)
            throw std::runtime_error(path + ":" + std::to_string(l + 1) +
                                     ": expected 6 fields");
        StitchedEdge e{};
        const long row = static_cast<long>(l + 1);
        e.i = static_cast<int>(parse_long(fields[0], path, row));
        e.j = static_cast<int>(parse_long(fields[1], path, row));
        e.d = parse_double(fields[2], path, row);
        e.omega = parse_double(fields[3], path, row);
        e.count = static_cast<int>(parse_long(fields[4], path, row));
        e.spread = parse_double(fields[5], path, row);
        max_node = std::max({max_node, e.i, e.j});
        graph.edges.push_back(e);
    }
    graph.num_nodes = num_nodes > 0 ? num_nodes : max_node + 1;
    return graph;
}

void write_locality_graph(const std::string& path, const LocalityGraph& graph) {
    std::string out = "i,j,jaccard\n";
    for (int i = 0; i < graph.num_nodes(); ++i)
        for (const auto& nb : graph.adjacency[i]) {
            if (nb.node <= i) continue;
            out += std::to_string(i);
            out += ',';
            out += std::to_string(nb.node);
            out += ',';
            out += fmt_double(nb.jaccard);
            out += '\n';
        }
    write_text_atomic(path, out);
}

void write_patch_cover(const std::string& path, const PatchCover& cover) {
    nlohmann::json j;
    j["patches"] = cover.patches;
    nlohmann::json nbrs = nlohmann::json::array();
    for (const auto& [p, q] : cover.neighbors) nbrs.push_back({p, q});
    j["neighbors"] = nbrs;
    write_text_atomic(path, j.dump() + "\n");
}

}  // namespace distgeo
