#include "moubo/problems.hpp"

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <memory>
#include <mutex>

#include <nlohmann/json.hpp>

namespace moubo {

namespace {

void check_box(const Box& box, const Point& p, const char* what) {
    if (!box.contains(p, 1e-9))
        throw std::invalid_argument(std::string(what) + ": input outside the problem box");
}

Box box2(double a0, double b0, double a1, double b1) { return Box({a0, a1}, {b0, b1}); }

Box unit_box(std::size_t dim) {
    return Box(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

}  // namespace

ObjectiveVector f2x2(const Point& x, const Point& u) {
    static const Box xb = box2(0, 1, 1, 2);
    static const Box ub = box2(2, 3, 3, 4);
    require_same_dim(x.size(), 2, "f2x2 x");
    require_same_dim(u.size(), 2, "f2x2 u");
    check_box(xb, x, "f2x2 x");
    check_box(ub, u, "f2x2 u");
    const double f1 = (x[0] - u[0] + 2) * (x[0] - u[0] + 2) + (x[1] - u[1] + 2) * (x[1] - u[1] + 2) +
                      5 * u[0];
    const double q = x[0] * x[1] - u[0] + 1.5;
    const double f2 = (x[0] - x[1] + 1) * (x[0] - x[1] + 1) + q * q + 5 * u[1];
    return {f1, f2};
}

ObjectiveVector f2x2_mean(const Point& x) {
    require_same_dim(x.size(), 2, "f2x2_mean");
    const double m1 = x[0] * (x[0] - 1) + x[1] * (x[1] - 3) + 91.0 / 6.0;
    const double m2 = x[0] * x[0] * x[1] * x[1] + x[0] * x[0] - 4 * x[0] * x[1] + 2 * x[0] +
                      x[1] * x[1] - 2 * x[1] + 235.0 / 12.0;
    return {m1, m2};
}

ObjectiveVector f5x5(const Point& x, const Point& u) {
    static const Box ub5 = unit_box(5);
    require_same_dim(x.size(), 5, "f5x5 x");
    require_same_dim(u.size(), 5, "f5x5 u");
    check_box(ub5, x, "f5x5 x");
    check_box(ub5, u, "f5x5 u");
    double xs = 0.0;
    for (double v : x) xs += v;
    const double a = xs + u[0] + u[1] + u[2] - u[3] + u[4] - 5;
    const double b = xs + u[0] + u[1] + u[2] + u[3] - u[4] - 5;
    return {a * a, b * b};
}

const std::vector<ProblemDefinition>& problem_catalog() {
    static const std::vector<ProblemDefinition> catalog = [] {
        std::vector<ProblemDefinition> out;

        ProblemDefinition p4;
        p4.name = "4d";
        p4.x_box = box2(0, 1, 1, 2);
        p4.u_box = box2(2, 3, 3, 4);
        p4.evaluate = [](const Point& x, const Point& u) { return f2x2(x, u); };
        p4.u_dist = UDistribution::uniform(p4.u_box);
        p4.mean_objective = [](const Point& x) { return f2x2_mean(x); };
        out.push_back(std::move(p4));

        ProblemDefinition p10;
        p10.name = "10d";
        p10.x_box = unit_box(5);
        p10.u_box = unit_box(5);
        p10.evaluate = [](const Point& x, const Point& u) { return f5x5(x, u); };
        p10.u_dist = UDistribution::uniform(p10.u_box);
        out.push_back(std::move(p10));

        ProblemDefinition p10b;
        p10b.name = "10d-bis";
        p10b.x_box = unit_box(5);
        p10b.u_box = unit_box(5);
        p10b.evaluate = [](const Point& x, const Point& u) { return f5x5(x, u); };
        p10b.u_dist = UDistribution::gaussian(Point(5, 0.5), std::vector<double>(5, 0.1), unit_box(5));
        out.push_back(std::move(p10b));

        return out;
    }();
    return catalog;
}

const ProblemDefinition& find_problem(const std::string& name) {
    for (const auto& p : problem_catalog()) {
        if (p.name == name) return p;
    }
    std::string names;
    for (const auto& p : problem_catalog()) names += (names.empty() ? "" : ", ") + p.name;
    throw ConfigError("unknown problem '" + name + "'; available: " + names);
}

namespace {

// Keeps a line-oriented child process alive across evaluations.
class SubprocessEvaluator {
public:
    explicit SubprocessEvaluator(std::string command) : command_(std::move(command)) { spawn(); }

    ~SubprocessEvaluator() {
        if (to_child_ >= 0) close(to_child_);
        if (from_child_ >= 0) close(from_child_);
        if (pid_ > 0) waitpid(pid_, nullptr, 0);
    }

    ObjectiveVector evaluate(const Point& x, const Point& u, std::size_t n_objectives) {
        std::lock_guard<std::mutex> lock(mutex_);
        nlohmann::json req;
        req["x"] = x;
        req["u"] = u;
        std::string line = req.dump();
        line.push_back('\n');
        write_all(line);
        const std::string reply = read_line();
        nlohmann::json res;
        try {
            res = nlohmann::json::parse(reply);
        } catch (const std::exception& e) {
            throw EvaluatorError("external evaluator: unparsable reply: " + reply);
        }
        if (!res.contains("f"))
            throw EvaluatorError("external evaluator: reply missing \"f\": " + reply);
        ObjectiveVector f = res["f"].get<ObjectiveVector>();
        if (f.size() != n_objectives)
            throw EvaluatorError("external evaluator: expected " + std::to_string(n_objectives) +
                                 " objectives, got " + std::to_string(f.size()));
        return f;
    }

private:
    void spawn() {
        int in_pipe[2];   // parent -> child
        int out_pipe[2];  // child -> parent
        if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
            throw EvaluatorError("external evaluator: pipe failed");
        pid_ = fork();
        if (pid_ < 0) throw EvaluatorError("external evaluator: fork failed");
        if (pid_ == 0) {
            dup2(in_pipe[0], STDIN_FILENO);
            dup2(out_pipe[1], STDOUT_FILENO);
            close(in_pipe[0]);
            close(in_pipe[1]);
            close(out_pipe[0]);
            close(out_pipe[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), (char*)nullptr);
            _exit(127);
        }
        close(in_pipe[0]);
        close(out_pipe[1]);
        to_child_ = in_pipe[1];
        from_child_ = out_pipe[0];
    }

    void write_all(const std::string& data) {
        std::size_t off = 0;
        while (off < data.size()) {
            const ssize_t w = write(to_child_, data.data() + off, data.size() - off);
            if (w < 0) {
                if (errno == EINTR) continue;
                throw EvaluatorError("external evaluator: write failed (process gone?)");
            }
            off += static_cast<std::size_t>(w);
        }
    }

    std::string read_line() {
        std::string line;
        char c;
        for (;;) {
            const ssize_t r = read(from_child_, &c, 1);
            if (r < 0) {
                if (errno == EINTR) continue;
                throw EvaluatorError("external evaluator: read failed");
            }
            if (r == 0) throw EvaluatorError("external evaluator: process closed its output");
            if (c == '\n') return line;
            line.push_back(c);
        }
    }

    std::string command_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::mutex mutex_;
};

}  // namespace

ProblemDefinition external_problem(const std::string& command, Box x_box, Box u_box,
                                   std::size_t n_objectives, UDistribution u_dist) {
    if (n_objectives < 2) throw ConfigError("external problem: need at least 2 objectives");
    ProblemDefinition p;
    p.name = "external:" + command;
    p.x_box = std::move(x_box);
    p.u_box = std::move(u_box);
    p.n_objectives = n_objectives;
    p.u_dist = std::move(u_dist);
    auto proc = std::make_shared<SubprocessEvaluator>(command);
    const Box xb = p.x_box;
    const Box ub = p.u_box;
    p.evaluate = [proc, xb, ub, n_objectives](const Point& x, const Point& u) {
        check_box(xb, x, "external x");
        check_box(ub, u, "external u");
        return proc->evaluate(x, u, n_objectives);
    };
    return p;
}

}  // namespace moubo
