#include "fracflow/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace fracflow {

void write_mesh(std::ostream& out, const Mesh& mesh)
{
    out << "fracflow-mesh v1\n" << std::setprecision(17);
    out << "NODES " << mesh.num_nodes() << '\n';
    for (int i = 0; i < mesh.num_nodes(); ++i)
        out << i << ' ' << mesh.nodes()[i].x() << ' ' << mesh.nodes()[i].y() << '\n';
    out << "CELLS " << mesh.num_triangles() << '\n';
    for (int i = 0; i < mesh.num_triangles(); ++i) {
        const auto& t = mesh.triangles()[i];
        out << i << ' ' << t.nodes[0] << ' ' << t.nodes[1] << ' ' << t.nodes[2] << ' ' << t.region << '\n';
    }
    out << "FRACTURE_EDGES " << mesh.fracture_edges().size() << '\n';
    for (std::size_t i = 0; i < mesh.fracture_edges().size(); ++i) {
        const auto& e = mesh.fracture_edges()[i];
        out << i << ' ' << e.nodes[0] << ' ' << e.nodes[1] << ' ' << e.fracture << ' ' << e.region << '\n';
    }
    out << "BOUNDARY " << mesh.boundary_edges().size() << '\n';
    for (std::size_t i = 0; i < mesh.boundary_edges().size(); ++i) {
        const auto& e = mesh.boundary_edges()[i];
        out << i << ' ' << e.nodes[0] << ' ' << e.nodes[1] << ' ' << to_string(e.tag) << '\n';
    }
    if (!mesh.fractures().empty()) {
        out << "FRACTURES " << mesh.fractures().size() << '\n';
        for (std::size_t i = 0; i < mesh.fractures().size(); ++i) {
            const auto& f = mesh.fractures()[i];
            out << i << ' ' << f.width << ' ' << f.region << ' ' << f.polyline.size();
            for (const auto& p : f.polyline) out << ' ' << p.x() << ' ' << p.y();
            out << '\n';
        }
    }
}

void write_mesh_file(const std::string& path, const Mesh& mesh)
{
    std::ofstream out(path);
    if (!out) throw MeshError("cannot open '" + path + "' for writing");
    write_mesh(out, mesh);
    if (!out) throw MeshError("error writing '" + path + "'");
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-blank, non-comment line; false at end of input.
    bool next(std::istringstream& line)
    {
        std::string text;
        while (std::getline(in_, text)) {
            ++number_;
            const auto first = text.find_first_not_of(" \t\r");
            if (first == std::string::npos || text[first] == '#') continue;
            line.clear();
            line.str(text);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw MeshError("mesh file line " + std::to_string(number_) + ": " + what);
    }

private:
    std::istream& in_;
    int number_ = 0;
};

}  // namespace

Mesh read_mesh(std::istream& in)
{
    LineReader reader(in);
    std::istringstream line;
    if (!reader.next(line)) reader.fail("empty input");
    std::string magic, version;
    line >> magic >> version;
    if (magic != "fracflow-mesh" || version != "v1") reader.fail("expected header 'fracflow-mesh v1'");

    std::vector<Point> nodes;
    std::vector<Triangle> triangles;
    std::vector<FractureEdge> fracture_edges;
    std::vector<BoundaryEdge> boundary;
    std::vector<FractureSpec> fractures;

    auto expect_id = [&](std::istringstream& l, std::size_t expected) {
        std::size_t id = 0;
        if (!(l >> id) || id != expected) reader.fail("expected entity id " + std::to_string(expected));
    };

    while (reader.next(line)) {
        std::string section;
        long long count = -1;
        line >> section >> count;
        if (count < 0) reader.fail("section '" + section + "' needs a non-negative count");
        for (long long k = 0; k < count; ++k) {
            std::istringstream row;
            if (!reader.next(row)) reader.fail("unexpected end of section " + section);
            expect_id(row, static_cast<std::size_t>(k));
            if (section == "NODES") {
                double x = 0, y = 0;
                if (!(row >> x >> y)) reader.fail("bad node record");
                nodes.emplace_back(x, y);
            } else if (section == "CELLS") {
                Triangle t;
                if (!(row >> t.nodes[0] >> t.nodes[1] >> t.nodes[2] >> t.region)) reader.fail("bad cell record");
                triangles.push_back(t);
            } else if (section == "FRACTURE_EDGES") {
                FractureEdge e;
                if (!(row >> e.nodes[0] >> e.nodes[1] >> e.fracture >> e.region))
                    reader.fail("bad fracture edge record");
                fracture_edges.push_back(e);
            } else if (section == "BOUNDARY") {
                BoundaryEdge e;
                std::string tag;
                if (!(row >> e.nodes[0] >> e.nodes[1] >> tag)) reader.fail("bad boundary record");
                try {
                    e.tag = boundary_tag_from_string(tag);
                } catch (const MeshError& err) {
                    reader.fail(err.what());
                }
                boundary.push_back(e);
            } else if (section == "FRACTURES") {
                FractureSpec f;
                f.id = static_cast<int>(k);
                std::size_t npts = 0;
                if (!(row >> f.width >> f.region >> npts)) reader.fail("bad fracture record");
                for (std::size_t p = 0; p < npts; ++p) {
                    double x = 0, y = 0;
                    if (!(row >> x >> y)) reader.fail("bad fracture polyline");
                    f.polyline.emplace_back(x, y);
                }
                fractures.push_back(f);
            } else {
                reader.fail("unknown section '" + section + "'");
            }
        }
    }

    return Mesh(std::move(nodes), std::move(triangles), std::move(fracture_edges), std::move(boundary),
                std::move(fractures));
}

Mesh read_mesh_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file '" + path + "'");
    return read_mesh(in);
}

}  // namespace fracflow
