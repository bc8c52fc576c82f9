#include "trajectory_io.hpp"

#include "config.hpp"

#include <hkflow/flow.hpp>
#include <hkflow/io.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace hkflow::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
    return out;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> cells;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    return cells;
}

double cell_number(const std::string& s, const std::string& where)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 && (s == "nan" || s == "-nan")) return std::numeric_limits<double>::quiet_NaN();
    require(used > 0 && used == s.size(), ErrorCode::ParseError, "bad number '" + s + "' in " + where);
    return v;
}

std::string snapshot_name(std::size_t step)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%05zu.off", step);
    return buf;
}

} // namespace

std::string accumulator_column(double alpha)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "acc_%g", alpha);
    return buf;
}

void write_trajectory(const fs::path& dir, const FlowTrajectory& traj)
{
    fs::create_directories(dir / "snapshots");
    {
        auto out = open_out(dir / "trajectory.csv");
        out << "step,t,dt,min_H,max_H,max_H_pow,area,min_quality,min_principal";
        for (double a : traj.alphas) out << ',' << accumulator_column(a);
        out << '\n';
        for (const auto& r : traj.steps) {
            out << r.step << ',' << format_number(r.time) << ',' << format_number(r.dt) << ','
                << format_number(r.min_H) << ',' << format_number(r.max_H) << ',' << format_number(r.max_H_pow)
                << ',' << format_number(r.area) << ',' << format_number(r.min_quality) << ','
                << format_number(r.min_principal);
            for (double v : r.accumulators) out << ',' << format_number(v);
            out << '\n';
        }
    }
    auto index = open_out(dir / "snapshots" / "index.csv");
    index << "index,step,t,file\n";
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const FlowState& s = traj.states[i];
        if (!s.has_mesh()) continue;
        const std::string name = snapshot_name(s.step);
        write_off((dir / "snapshots" / name).string(), s.mesh);
        index << i << ',' << s.step << ',' << format_number(s.time) << ',' << name << '\n';
    }
}

FlowTrajectory read_trajectory(const fs::path& dir, int k, Termination termination)
{
    const fs::path csv = dir / "trajectory.csv";
    require(fs::exists(csv), ErrorCode::MeshNotFound, "no trajectory.csv in " + dir.string());
    std::ifstream in(csv);
    require(in.good(), ErrorCode::IoError, "cannot open " + csv.string());

    FlowTrajectory traj;
    traj.k = k;
    traj.termination = termination;
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::ParseError, "empty trajectory.csv");
    const auto header = split_csv(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* name : {"step", "t", "dt", "min_H", "max_H", "max_H_pow", "area", "min_quality", "min_principal"}) {
        require(col.count(name) == 1, ErrorCode::ParseError, std::string("trajectory.csv lacks column ") + name);
    }
    std::vector<std::size_t> acc_cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i].rfind("acc_", 0) == 0) {
            traj.alphas.push_back(cell_number(header[i].substr(4), "trajectory.csv header"));
            acc_cols.push_back(i);
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        require(cells.size() == header.size(), ErrorCode::ParseError, "ragged row in trajectory.csv");
        auto at = [&](const char* name) { return cell_number(cells[col.at(name)], "trajectory.csv"); };
        StepRecord r;
        r.step = static_cast<std::size_t>(at("step"));
        r.time = at("t");
        r.dt = at("dt");
        r.min_H = at("min_H");
        r.max_H = at("max_H");
        r.max_H_pow = at("max_H_pow");
        r.area = at("area");
        r.min_quality = at("min_quality");
        r.min_principal = at("min_principal");
        for (std::size_t c : acc_cols) r.accumulators.push_back(cell_number(cells[c], "trajectory.csv"));
        traj.steps.push_back(std::move(r));
    }

    const fs::path index = dir / "snapshots" / "index.csv";
    require(fs::exists(index), ErrorCode::MeshNotFound, "no snapshots/index.csv in " + dir.string());
    std::ifstream idx(index);
    std::getline(idx, line);
    while (std::getline(idx, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        require(cells.size() == 4, ErrorCode::ParseError, "bad row in snapshots/index.csv");
        const Hypersurface mesh = read_off((dir / "snapshots" / cells[3]).string());
        FlowState s = make_state(mesh, cell_number(cells[2], "snapshots/index.csv"));
        s.step = static_cast<std::size_t>(cell_number(cells[1], "snapshots/index.csv"));
        traj.states.push_back(std::move(s));
    }
    return traj;
}

void write_plot_script(const fs::path& dir, const FlowTrajectory& traj)
{
    auto out = open_out(dir / "plot.gp");
    out << "# gnuplot -persist plot.gp\n"
        << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set xlabel 't'\n"
        << "set multiplot layout 2,2\n"
        << "set logscale y\n"
        << "plot 'trajectory.csv' using 2:5 with lines title 'max H', '' using 2:4 with lines title 'min H'\n"
        << "plot 'trajectory.csv' using 2:6 with lines title 'max H^(k+1)'\n"
        << "unset logscale y\n"
        << "plot 'trajectory.csv' using 2:7 with lines title 'area'\n";
    if (!traj.alphas.empty()) {
        out << "plot ";
        for (std::size_t i = 0; i < traj.alphas.size(); ++i) {
            out << (i ? ", " : "") << "'trajectory.csv' using 2:" << 10 + i << " with lines title '"
                << accumulator_column(traj.alphas[i]) << "'";
        }
        out << '\n';
    }
    out << "unset multiplot\n";
}

} // namespace hkflow::cli
