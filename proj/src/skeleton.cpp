#include "egomo/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace egomo {

void Skeleton::validate() const {
  const int n = joint_count();
  if (n != kJointCount) throw BadConfig("skeleton: expected 23 joints");
  if (static_cast<int>(names.size()) != n || offsets.rows() != n || offsets.cols() != 3 ||
      static_cast<int>(upper_body.size()) != n || static_cast<int>(lower_body.size()) != n)
    throw BadConfig("skeleton: inconsistent table sizes");
  int roots = 0;
  for (int j = 0; j < n; ++j) {
    if (parent[j] < 0) {
      ++roots;
      continue;
    }
    if (parent[j] >= n) throw BadConfig("skeleton: parent index out of range");
    // walk up; a cycle would never reach the root
    int steps = 0;
    for (int p = parent[j]; p >= 0; p = parent[p])
      if (++steps > n) throw BadConfig("skeleton: parent cycle");
  }
  if (roots != 1 || parent[0] >= 0) throw BadConfig("skeleton: tree must be rooted at joint 0");
  if (!offsets.allFinite()) throw BadConfig("skeleton: non-finite offset");
  if (head_joint < 0 || head_joint >= n) throw BadConfig("skeleton: bad head joint");
  if (wrist_joints.size() != 2) throw BadConfig("skeleton: need exactly two wrist joints");
  for (int j : wrist_joints)
    if (j < 0 || j >= n) throw BadConfig("skeleton: bad wrist joint");
  if (foot_joints.empty()) throw BadConfig("skeleton: no foot joints");
  // regions + {head, root} must partition the joint set
  for (int j = 0; j < n; ++j) {
    const bool special = (j == 0 || j == head_joint);
    const int count = (upper_body[j] ? 1 : 0) + (lower_body[j] ? 1 : 0) + (special ? 1 : 0);
    if (count != 1) throw BadConfig("skeleton: joint " + names[j] + " not uniquely assigned");
  }
}

Skeleton Skeleton::xsens23(double scale) {
  struct Row {
    const char* name;
    int parent;
    double x, y, z;
  };
  // T-pose bone vectors, meters: Z up, X forward, arms along +/-Y
  static const Row rows[23] = {
      {"Pelvis", -1, 0, 0, 0},
      {"L5", 0, 0, 0, 0.10},
      {"L3", 1, 0, 0, 0.10},
      {"T12", 2, 0, 0, 0.10},
      {"T8", 3, 0, 0, 0.12},
      {"Neck", 4, 0, 0, 0.13},
      {"Head", 5, 0, 0, 0.12},
      {"RightShoulder", 4, 0, -0.10, 0.10},
      {"RightUpperArm", 7, 0, -0.12, 0},
      {"RightForeArm", 8, 0, -0.28, 0},
      {"RightHand", 9, 0, -0.25, 0},
      {"LeftShoulder", 4, 0, 0.10, 0.10},
      {"LeftUpperArm", 11, 0, 0.12, 0},
      {"LeftForeArm", 12, 0, 0.28, 0},
      {"LeftHand", 13, 0, 0.25, 0},
      {"RightUpperLeg", 0, 0, -0.09, 0},
      {"RightLowerLeg", 15, 0, 0, -0.44},
      {"RightFoot", 16, 0, 0, -0.43},
      {"RightToe", 17, 0.15, 0, -0.07},
      {"LeftUpperLeg", 0, 0, 0.09, 0},
      {"LeftLowerLeg", 19, 0, 0, -0.44},
      {"LeftFoot", 20, 0, 0, -0.43},
      {"LeftToe", 21, 0.15, 0, -0.07},
  };
  Skeleton s;
  s.version = "xsens23@1";
  s.offsets.resize(23, 3);
  for (int j = 0; j < 23; ++j) {
    s.names.emplace_back(rows[j].name);
    s.parent.push_back(rows[j].parent);
    s.offsets.row(j) << rows[j].x * scale, rows[j].y * scale, rows[j].z * scale;
  }
  s.head_joint = 6;
  s.wrist_joints = {10, 14};
  s.foot_joints = {17, 18, 21, 22};
  s.upper_body.assign(23, false);
  s.lower_body.assign(23, false);
  for (int j : {1, 2, 3, 4, 5, 7, 8, 9, 10, 11, 12, 13, 14}) s.upper_body[j] = true;
  for (int j : {15, 16, 17, 18, 19, 20, 21, 22}) s.lower_body[j] = true;
  s.validate();
  return s;
}

Skeleton load_skeleton(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open skeleton file: " + path);
  Skeleton s;
  int joints = 0;
  std::string line;
  auto read_list = [](std::istringstream& ss) {
    std::vector<int> v;
    int x;
    while (ss >> x) v.push_back(x);
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "version") {
      ss >> s.version;
    } else if (key == "joints") {
      ss >> joints;
      if (joints <= 0) throw BadConfig("skeleton file: bad joint count");
      s.names.resize(joints);
      s.parent.assign(joints, -1);
      s.offsets.setZero(joints, 3);
    } else if (key == "joint") {
      int idx, par;
      std::string name;
      double x, y, z;
      if (!(ss >> idx >> name >> par >> x >> y >> z) || idx < 0 || idx >= joints)
        throw BadConfig("skeleton file: malformed joint row: " + line);
      s.names[idx] = name;
      s.parent[idx] = par;
      s.offsets.row(idx) << x, y, z;
    } else if (key == "head_joint") {
      ss >> s.head_joint;
    } else if (key == "wrists") {
      s.wrist_joints = read_list(ss);
    } else if (key == "feet") {
      s.foot_joints = read_list(ss);
    } else if (key == "upper" || key == "lower") {
      auto idxs = read_list(ss);
      auto& mask = (key == "upper") ? s.upper_body : s.lower_body;
      mask.assign(joints, false);
      for (int j : idxs) {
        if (j < 0 || j >= joints) throw BadConfig("skeleton file: mask index out of range");
        mask[j] = true;
      }
    } else {
      throw BadConfig("skeleton file: unknown key '" + key + "'");
    }
  }
  s.validate();
  return s;
}

void save_skeleton(const Skeleton& skel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write skeleton file: " + path);
  out << "# egomo skeleton table\n";
  out << "version " << skel.version << "\n";
  out << "joints " << skel.joint_count() << "\n";
  out.precision(17);
  for (int j = 0; j < skel.joint_count(); ++j)
    out << "joint " << j << " " << skel.names[j] << " " << skel.parent[j] << " "
        << skel.offsets(j, 0) << " " << skel.offsets(j, 1) << " " << skel.offsets(j, 2) << "\n";
  out << "head_joint " << skel.head_joint << "\n";
  auto write_list = [&out](const char* key, const std::vector<int>& v) {
    out << key;
    for (int j : v) out << " " << j;
    out << "\n";
  };
  write_list("wrists", skel.wrist_joints);
  write_list("feet", skel.foot_joints);
  std::vector<int> up, lo;
  for (int j = 0; j < skel.joint_count(); ++j) {
    if (skel.upper_body[j]) up.push_back(j);
    if (skel.lower_body[j]) lo.push_back(j);
  }
  write_list("upper", up);
  write_list("lower", lo);
  if (!out) throw IoError("short write: " + path);
}

}  // namespace egomo
