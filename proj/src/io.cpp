#include "growfem/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "growfem/error.hpp"

namespace growfem {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw Error("cannot open for writing: " + path);
    return f;
}

std::ofstream open_append(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::app);
    if (!f)
        throw Error("cannot open for appending: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open for reading: " + path);
    return f;
}

void check_id(const std::string& id) {
    if (id.empty() || id.find(',') != std::string::npos || id.find('\n') != std::string::npos ||
        id.find('#') != std::string::npos)
        throw Error("identifier unsuitable for CSV: \"" + id + "\"");
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r')
            cur += ch;
    }
    out.push_back(cur);
    return out;
}

double parse_num(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(where + ": not a number: \"" + s + "\"");
    }
}

int parse_int(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(where + ": not an integer: \"" + s + "\"");
    }
}

std::string sidecar_path(const std::string& csv_path) {
    return std::filesystem::path(csv_path).replace_extension(".json").string();
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_geometry(const StagedGeometry& g, const std::string& csv_path) {
    for (const auto& c : g.curves)
        check_id(c.id);
    auto f = open_out(csv_path);
    f << "curve_id,point_index,x,y\n";
    for (const auto& c : g.curves)
        for (std::size_t i = 0; i < c.points.size(); ++i)
            f << c.id << ',' << i << ',' << format_double(c.points[i].x) << ',' << format_double(c.points[i].y)
              << '\n';
    if (!f)
        throw Error("write failed: " + csv_path);

    nlohmann::json side;
    side["stage_time"] = g.stage_time;
    for (const auto& c : g.curves)
        side["closed"][c.id] = c.closed;
    side["subdomains"] = nlohmann::json::object();
    for (const auto& [label, pieces] : g.subdomains) {
        auto& arr = side["subdomains"][label] = nlohmann::json::array();
        for (const auto& p : pieces)
            arr.push_back({p.curve_id, p.orientation, p.s0, p.s1});
    }
    auto sf = open_out(sidecar_path(csv_path));
    sf << side.dump(2) << '\n';
    if (!sf)
        throw Error("write failed: " + sidecar_path(csv_path));
}

StagedGeometry read_geometry(const std::string& csv_path) {
    auto f = open_in(csv_path);
    std::string line;
    if (!std::getline(f, line) || split_csv(line) != std::vector<std::string>{"curve_id", "point_index", "x", "y"})
        throw Error(csv_path + ": bad or missing header");

    StagedGeometry g;
    std::map<std::string, std::size_t> curve_slot;
    std::vector<std::vector<std::pair<int, Point2>>> rows;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        const auto cells = split_csv(line);
        const std::string where = csv_path + ":" + std::to_string(line_no);
        if (cells.size() != 4)
            throw Error(where + ": expected 4 columns");
        const auto [it, inserted] = curve_slot.try_emplace(cells[0], rows.size());
        if (inserted)
            rows.emplace_back();
        rows[it->second].push_back(
            {parse_int(cells[1], where), {parse_num(cells[2], where), parse_num(cells[3], where)}});
    }
    g.curves.resize(rows.size());
    for (const auto& [id, slot] : curve_slot)
        g.curves[slot].id = id;
    for (std::size_t s = 0; s < rows.size(); ++s) {
        auto& r = rows[s];
        std::stable_sort(r.begin(), r.end(), [](const auto& l, const auto& rr) { return l.first < rr.first; });
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (r[i].first != int(i))
                throw Error(csv_path + ": curve " + g.curves[s].id + " point indices are not 0..n-1");
            g.curves[s].points.push_back(r[i].second);
        }
    }

    const std::string side_path = sidecar_path(csv_path);
    if (std::filesystem::exists(side_path)) {
        nlohmann::json side;
        try {
            auto sf = open_in(side_path);
            side = nlohmann::json::parse(sf);
        } catch (const nlohmann::json::exception& e) {
            throw Error(side_path + ": " + e.what());
        }
        try {
            if (side.contains("stage_time"))
                g.stage_time = side["stage_time"].get<int>();
            if (side.contains("closed"))
                for (auto& c : g.curves)
                    if (side["closed"].contains(c.id))
                        c.closed = side["closed"][c.id].get<bool>();
            if (side.contains("subdomains"))
                for (const auto& [label, arr] : side["subdomains"].items())
                    for (const auto& piece : arr)
                        g.subdomains[label].push_back({piece.at(0).get<std::string>(), piece.at(1).get<int>(),
                                                       piece.at(2).get<double>(), piece.at(3).get<double>()});
        } catch (const nlohmann::json::exception& e) {
            throw Error(side_path + ": " + e.what());
        }
    }
    for (const auto& c : g.curves)
        validate_curve(c);
    return g;
}

void write_displacement_csv(const std::vector<DisplacementField>& fields, const std::string& path) {
    auto f = open_out(path);
    f << "segment_id,key_type,key1,key2,dx,dy\n";
    for (const auto& field : fields) {
        check_id(field.parent_id);
        const std::string kind = field.keying == Keying::Parameter ? "parameter" : "coordinate";
        for (const auto& r : field.rows) {
            f << field.segment_id() << ',' << kind << ',' << format_double(r.key1) << ',';
            if (field.keying == Keying::Coordinate)
                f << format_double(r.key2);
            f << ',' << format_double(r.dx) << ',' << format_double(r.dy) << '\n';
        }
    }
    if (!f)
        throw Error("write failed: " + path);
}

std::vector<DisplacementField> read_displacement_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line) ||
        split_csv(line) != std::vector<std::string>{"segment_id", "key_type", "key1", "key2", "dx", "dy"})
        throw Error(path + ": bad or missing header");

    std::vector<DisplacementField> fields;
    std::map<std::string, std::size_t> slot;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        const auto cells = split_csv(line);
        const std::string where = path + ":" + std::to_string(line_no);
        if (cells.size() != 6)
            throw Error(where + ": expected 6 columns");
        Keying keying;
        if (cells[1] == "parameter")
            keying = Keying::Parameter;
        else if (cells[1] == "coordinate")
            keying = Keying::Coordinate;
        else
            throw Error(where + ": unknown key_type \"" + cells[1] + "\"");

        const auto [it, inserted] = slot.try_emplace(cells[0], fields.size());
        if (inserted) {
            DisplacementField field;
            const auto hash = cells[0].find('#');
            if (hash == std::string::npos) {
                field.parent_id = cells[0];
                field.segment_index = -1;
            } else {
                field.parent_id = cells[0].substr(0, hash);
                field.segment_index = parse_int(cells[0].substr(hash + 1), where);
            }
            field.keying = keying;
            fields.push_back(std::move(field));
        }
        DisplacementField& field = fields[it->second];
        if (field.keying != keying)
            throw Error(where + ": key_type changes within segment " + cells[0]);
        DisplacementRow row;
        row.key1 = parse_num(cells[2], where);
        if (keying == Keying::Coordinate)
            row.key2 = parse_num(cells[3], where);
        else if (!cells[3].empty())
            throw Error(where + ": key2 must be empty for parameter keying");
        row.dx = parse_num(cells[4], where);
        row.dy = parse_num(cells[5], where);
        field.rows.push_back(row);
    }
    for (const auto& field : fields)
        validate_field(field);
    return fields;
}

void write_segments_csv(const SegmentedGeometry& g, const std::string& path) {
    auto f = open_out(path);
    f << "parent_id,segment_index,point_index,x,y,start_junction,end_junction\n";
    for (const auto& [parent, segs] : g.segments)
        for (const auto& seg : segs)
            for (std::size_t i = 0; i < seg.points.size(); ++i)
                f << parent << ',' << seg.segment_index << ',' << i << ',' << format_double(seg.points[i].x) << ','
                  << format_double(seg.points[i].y) << ',' << (seg.start_is_junction ? 1 : 0) << ','
                  << (seg.end_is_junction ? 1 : 0) << '\n';
    if (!f)
        throw Error("write failed: " + path);
}

AreasWriter::AreasWriter(const std::string& path, const std::vector<std::string>& labels)
    : path_(path), labels_(labels) {
    auto f = open_out(path_);
    f << "step,time";
    for (const auto& label : labels_)
        f << ",area_" << label;
    f << ",area_total\n";
    if (!f)
        throw Error("write failed: " + path_);
}

void AreasWriter::append(int step, double time, const std::map<std::string, double>& areas, double total) {
    auto f = open_append(path_);
    f << step << ',' << format_double(time);
    for (const auto& label : labels_) {
        const auto it = areas.find(label);
        f << ',' << format_double(it == areas.end() ? 0.0 : it->second);
    }
    f << ',' << format_double(total) << '\n';
    if (!f)
        throw Error("write failed: " + path_);
}

QualityWriter::QualityWriter(const std::string& path) : path_(path) {
    auto f = open_out(path_);
    f << "step,min_quality,inverted_count\n";
    if (!f)
        throw Error("write failed: " + path_);
}

void QualityWriter::append(int step, const QualityReport& report) {
    auto f = open_append(path_);
    f << step << ',' << format_double(report.min_quality) << ',' << report.inverted_count << '\n';
    if (!f)
        throw Error("write failed: " + path_);
}

void write_fields_csv(const Mesh& mesh, const std::array<Eigen::VectorXd, 3>& c,
                      const std::array<Eigen::VectorXd, 3>& production, const std::string& path) {
    auto f = open_out(path);
    f << "node,x,y,A,B,C,P_A,P_B,P_C\n";
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        f << i << ',' << format_double(mesh.nodes[i].x) << ',' << format_double(mesh.nodes[i].y);
        for (int s = 0; s < 3; ++s)
            f << ',' << format_double(c[std::size_t(s)][long(i)]);
        for (int s = 0; s < 3; ++s)
            f << ',' << format_double(production[std::size_t(s)][long(i)]);
        f << '\n';
    }
    if (!f)
        throw Error("write failed: " + path);
}

void write_vtk(const Mesh& mesh, const std::array<Eigen::VectorXd, 3>& c,
               const std::array<Eigen::VectorXd, 3>& production, const std::string& path) {
    std::set<std::string> label_set(mesh.element_labels.begin(), mesh.element_labels.end());
    std::map<std::string, int> label_index;
    for (const auto& label : label_set)
        label_index.emplace(label, int(label_index.size()));

    auto f = open_out(path);
    f << "# vtk DataFile Version 3.0\n";
    f << "growfem snapshot\n";
    f << "ASCII\n";
    f << "DATASET UNSTRUCTURED_GRID\n";
    f << "POINTS " << mesh.nodes.size() << " double\n";
    for (const auto& p : mesh.nodes)
        f << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
    f << "CELLS " << mesh.triangles.size() << ' ' << mesh.triangles.size() * 4 << '\n';
    for (const auto& t : mesh.triangles)
        f << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    f << "CELL_TYPES " << mesh.triangles.size() << '\n';
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e)
        f << "5\n";

    f << "CELL_DATA " << mesh.triangles.size() << '\n';
    f << "SCALARS subdomain int 1\nLOOKUP_TABLE default\n";
    for (const auto& label : mesh.element_labels)
        f << label_index.at(label) << '\n';
    f << "SCALARS quality double 1\nLOOKUP_TABLE default\n";
    const auto report = quality_report(mesh);
    for (const double q : report.per_element_quality)
        f << format_double(q) << '\n';

    f << "POINT_DATA " << mesh.nodes.size() << '\n';
    const char* names[6] = {"A", "B", "C", "P_A", "P_B", "P_C"};
    for (int s = 0; s < 6; ++s) {
        const Eigen::VectorXd& v = s < 3 ? c[std::size_t(s)] : production[std::size_t(s - 3)];
        f << "SCALARS " << names[s] << " double 1\nLOOKUP_TABLE default\n";
        for (long i = 0; i < v.size(); ++i)
            f << format_double(v[i]) << '\n';
    }
    if (!f)
        throw Error("write failed: " + path);
}

} // namespace growfem
