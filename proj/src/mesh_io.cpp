#include "eigenflow/errors.hpp"
#include "eigenflow/mesh.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

namespace eigenflow {

namespace {

// Next line that is neither blank nor a '#' comment.
bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TriangleMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open mesh file " + path.string());

  std::string line;
  if (!next_content_line(in, line)) throw InvalidInput(path.string() + ": empty file");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") throw InvalidInput(path.string() + ": missing OFF header");

  // counts may share the header line
  long nv = -1, nf = -1, ne = 0;
  if (!(header >> nv >> nf)) {
    if (!next_content_line(in, line)) throw InvalidInput(path.string() + ": missing counts line");
    std::istringstream counts(line);
    if (!(counts >> nv >> nf)) throw InvalidInput(path.string() + ": malformed counts line");
    counts >> ne;
  }
  if (nv <= 0 || nf <= 0) throw InvalidInput(path.string() + ": non-positive vertex or face count");

  TriangleMesh mesh;
  mesh.vertices.resize(nv, 3);
  mesh.faces.resize(nf, 3);
  for (long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line)) throw InvalidInput(path.string() + ": truncated vertex list");
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) throw InvalidInput(path.string() + ": malformed vertex line " + std::to_string(i));
    mesh.vertices.row(i) << x, y, z;
  }
  for (long f = 0; f < nf; ++f) {
    if (!next_content_line(in, line)) throw InvalidInput(path.string() + ": truncated face list");
    std::istringstream ls(line);
    int n, a, b, c;
    if (!(ls >> n)) throw InvalidInput(path.string() + ": malformed face line " + std::to_string(f));
    if (n != 3) throw InvalidInput(path.string() + ": face " + std::to_string(f) + " is not a triangle");
    if (!(ls >> a >> b >> c)) throw InvalidInput(path.string() + ": malformed face line " + std::to_string(f));
    mesh.faces.row(f) << a, b, c;
  }

  validate(mesh);
  return mesh;
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write mesh file " + path.string());
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << " 0\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i) {
    out << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2) << '\n';
  }
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    out << "3 " << mesh.faces(f, 0) << ' ' << mesh.faces(f, 1) << ' ' << mesh.faces(f, 2) << '\n';
  }
  if (!out) throw InvalidInput("failed writing mesh file " + path.string());
}

}  // namespace eigenflow
