#ifndef NETSIMP_NN_TAPE_HPP
#define NETSIMP_NN_TAPE_HPP

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netsimp::nn {

using IdxMap = std::shared_ptr<const std::vector<int>>;

/// Eager reverse-mode tape over row-major 2-D tensors.
///
/// Every op computes its value immediately and records a pullback closure.
/// Pullbacks emit further tape ops instead of raw arithmetic, so a gradient
/// is itself differentiable: backward() can be applied to nodes produced by
/// an earlier backward(). The Wasserstein gradient penalty relies on this.
class Tape {
public:
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using MapT = Eigen::Map<RowMat>;
    using CMapT = Eigen::Map<const RowMat>;

    struct Node {
        int rows = 0, cols = 0;
        Eigen::VectorXd v;  // row-major flattened values
        bool req = false;   // participates in differentiation
        std::function<void(Tape&, int grad, std::vector<int>& gradof)> back;
    };

    int size() const { return static_cast<int>(nodes_.size()); }
    int rows(int id) const { return nodes_[static_cast<size_t>(id)].rows; }
    int cols(int id) const { return nodes_[static_cast<size_t>(id)].cols; }
    int count(int id) const { return rows(id) * cols(id); }
    bool requires_grad(int id) const { return nodes_[static_cast<size_t>(id)].req; }
    const Eigen::VectorXd& val(int id) const { return nodes_[static_cast<size_t>(id)].v; }
    double scalar_val(int id) const {
        check(count(id) == 1, "scalar_val: node is not 1x1");
        return nodes_[static_cast<size_t>(id)].v[0];
    }
    CMapT mat(int id) const {
        const Node& n = nodes_[static_cast<size_t>(id)];
        return CMapT(n.v.data(), n.rows, n.cols);
    }
    Eigen::MatrixXd matrix(int id) const { return mat(id); }

    // ---- node creation -------------------------------------------------

    int constant(int r, int c, Eigen::VectorXd data) {
        check(static_cast<int>(data.size()) == r * c, "constant: size mismatch");
        return push(r, c, std::move(data), false, nullptr);
    }

    int constant_matrix(const Eigen::MatrixXd& m) {
        Eigen::VectorXd d(m.size());
        MapT(d.data(), static_cast<int>(m.rows()), static_cast<int>(m.cols())) = m;
        return push(static_cast<int>(m.rows()), static_cast<int>(m.cols()), std::move(d), false,
                    nullptr);
    }

    int scalar(double x) { return constant(1, 1, Eigen::VectorXd::Constant(1, x)); }

    int zeros(int r, int c) { return constant(r, c, Eigen::VectorXd::Zero(r * c)); }
    int ones(int r, int c) { return constant(r, c, Eigen::VectorXd::Ones(r * c)); }

    /// Differentiable input (parameter or penalty interpolate).
    int leaf(int r, int c, Eigen::VectorXd data) {
        check(static_cast<int>(data.size()) == r * c, "leaf: size mismatch");
        return push(r, c, std::move(data), true, nullptr);
    }

    int leaf_matrix(const Eigen::MatrixXd& m) {
        Eigen::VectorXd d(m.size());
        MapT(d.data(), static_cast<int>(m.rows()), static_cast<int>(m.cols())) = m;
        return push(static_cast<int>(m.rows()), static_cast<int>(m.cols()), std::move(d), true,
                    nullptr);
    }

    // ---- elementwise ---------------------------------------------------

    int add(int a, int b) {
        check_same(a, b, "add");
        Eigen::VectorXd v = val(a) + val(b);
        return push(rows(a), cols(a), std::move(v), req2(a, b),
                    [a, b](Tape& tp, int g, std::vector<int>& go) {
                        tp.accum(go, a, g);
                        tp.accum(go, b, g);
                    });
    }

    int sub(int a, int b) {
        check_same(a, b, "sub");
        Eigen::VectorXd v = val(a) - val(b);
        return push(rows(a), cols(a), std::move(v), req2(a, b),
                    [a, b](Tape& tp, int g, std::vector<int>& go) {
                        tp.accum(go, a, g);
                        tp.accum(go, b, tp.neg(g));
                    });
    }

    int neg(int a) {
        Eigen::VectorXd v = -val(a);
        return push(rows(a), cols(a), std::move(v), requires_grad(a),
                    [a](Tape& tp, int g, std::vector<int>& go) { tp.accum(go, a, tp.neg(g)); });
    }

    int mul(int a, int b) {
        check_same(a, b, "mul");
        Eigen::VectorXd v = val(a).cwiseProduct(val(b));
        return push(rows(a), cols(a), std::move(v), req2(a, b),
                    [a, b](Tape& tp, int g, std::vector<int>& go) {
                        if (tp.requires_grad(a)) tp.accum(go, a, tp.mul(g, b));
                        if (tp.requires_grad(b)) tp.accum(go, b, tp.mul(g, a));
                    });
    }

    int scale(int a, double c) {
        Eigen::VectorXd v = c * val(a);
        return push(rows(a), cols(a), std::move(v), requires_grad(a),
                    [a, c](Tape& tp, int g, std::vector<int>& go) {
                        tp.accum(go, a, tp.scale(g, c));
                    });
    }

    int exp_(int a) {
        Eigen::VectorXd v = val(a).array().exp();
        const int id = push(rows(a), cols(a), std::move(v), requires_grad(a), nullptr);
        set_back(id, [a, id](Tape& tp, int g, std::vector<int>& go) {
            tp.accum(go, a, tp.mul(g, id));
        });
        return id;
    }

    int tanh_(int a) {
        Eigen::VectorXd v = val(a).array().tanh();
        const int id = push(rows(a), cols(a), std::move(v), requires_grad(a), nullptr);
        set_back(id, [a, id](Tape& tp, int g, std::vector<int>& go) {
            const int one = tp.ones(tp.rows(id), tp.cols(id));
            tp.accum(go, a, tp.mul(g, tp.sub(one, tp.mul(id, id))));
        });
        return id;
    }

    int sigmoid_(int a) {
        Eigen::VectorXd v = (1.0 + (-val(a).array()).exp()).inverse();
        const int id = push(rows(a), cols(a), std::move(v), requires_grad(a), nullptr);
        set_back(id, [a, id](Tape& tp, int g, std::vector<int>& go) {
            const int one = tp.ones(tp.rows(id), tp.cols(id));
            tp.accum(go, a, tp.mul(g, tp.mul(id, tp.sub(one, id))));
        });
        return id;
    }

    int leaky_relu(int a, double slope) {
        const Eigen::VectorXd& x = val(a);
        Eigen::VectorXd v(x.size()), d(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            v[i] = x[i] > 0.0 ? x[i] : slope * x[i];
            d[i] = x[i] > 0.0 ? 1.0 : slope;
        }
        const int r = rows(a), c = cols(a);
        return push(r, c, std::move(v), requires_grad(a),
                    [a, d = std::move(d), r, c](Tape& tp, int g, std::vector<int>& go) {
                        tp.accum(go, a, tp.mul(g, tp.constant(r, c, d)));
                    });
    }

    int abs_(int a) {
        const Eigen::VectorXd& x = val(a);
        Eigen::VectorXd v = x.cwiseAbs();
        Eigen::VectorXd s(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) s[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
        const int r = rows(a), c = cols(a);
        return push(r, c, std::move(v), requires_grad(a),
                    [a, s = std::move(s), r, c](Tape& tp, int g, std::vector<int>& go) {
                        tp.accum(go, a, tp.mul(g, tp.constant(r, c, s)));
                    });
    }

    int sqrt_(int a) {
        Eigen::VectorXd v = val(a).cwiseSqrt();
        const int id = push(rows(a), cols(a), std::move(v), requires_grad(a), nullptr);
        set_back(id, [a, id](Tape& tp, int g, std::vector<int>& go) {
            tp.accum(go, a, tp.mul(g, tp.scale(tp.recip(id), 0.5)));
        });
        return id;
    }

    int recip(int a) {
        Eigen::VectorXd v = val(a).cwiseInverse();
        const int id = push(rows(a), cols(a), std::move(v), requires_grad(a), nullptr);
        set_back(id, [a, id](Tape& tp, int g, std::vector<int>& go) {
            tp.accum(go, a, tp.neg(tp.mul(g, tp.mul(id, id))));
        });
        return id;
    }

    // ---- matrix products -------------------------------------------------

    int matmul(int a, int b, bool ta = false, bool tb = false) {
        const int ar = ta ? cols(a) : rows(a), ac = ta ? rows(a) : cols(a);
        const int br = tb ? cols(b) : rows(b), bc = tb ? rows(b) : cols(b);
        check(ac == br, "matmul: inner dimension mismatch");
        Eigen::VectorXd out(static_cast<Eigen::Index>(ar) * bc);
        MapT o(out.data(), ar, bc);
        const CMapT ma = mat(a), mb = mat(b);
        if (!ta && !tb) o.noalias() = ma * mb;
        else if (!ta && tb) o.noalias() = ma * mb.transpose();
        else if (ta && !tb) o.noalias() = ma.transpose() * mb;
        else o.noalias() = ma.transpose() * mb.transpose();
        return push(ar, bc, std::move(out), req2(a, b),
                    [a, b, ta, tb](Tape& tp, int g, std::vector<int>& go) {
                        tp.matmul_back(a, b, ta, tb, g, go, /*blocks=*/0);
                    });
    }

    /// Per-block matmul over tensors holding `blocks` equal-height blocks
    /// stacked along rows. Used for per-timestamp graph attention without a
    /// tape node per timestamp.
    int block_matmul(int a, int b, int blocks, bool ta = false, bool tb = false) {
        check(blocks > 0 && rows(a) % blocks == 0 && rows(b) % blocks == 0,
              "block_matmul: block count does not divide rows");
        const int abr = rows(a) / blocks, abc = cols(a);
        const int bbr = rows(b) / blocks, bbc = cols(b);
        const int ar = ta ? abc : abr, ac = ta ? abr : abc;
        const int br = tb ? bbc : bbr, bc = tb ? bbr : bbc;
        check(ac == br, "block_matmul: inner dimension mismatch");
        Eigen::VectorXd out(static_cast<Eigen::Index>(blocks) * ar * bc);
        for (int k = 0; k < blocks; ++k) {
            const CMapT ma(val(a).data() + static_cast<Eigen::Index>(k) * abr * abc, abr, abc);
            const CMapT mb(val(b).data() + static_cast<Eigen::Index>(k) * bbr * bbc, bbr, bbc);
            MapT o(out.data() + static_cast<Eigen::Index>(k) * ar * bc, ar, bc);
            if (!ta && !tb) o.noalias() = ma * mb;
            else if (!ta && tb) o.noalias() = ma * mb.transpose();
            else if (ta && !tb) o.noalias() = ma.transpose() * mb;
            else o.noalias() = ma.transpose() * mb.transpose();
        }
        return push(blocks * ar, bc, std::move(out), req2(a, b),
                    [a, b, ta, tb, blocks](Tape& tp, int g, std::vector<int>& go) {
                        tp.matmul_back(a, b, ta, tb, g, go, blocks);
                    });
    }

    // ---- reductions and broadcasts --------------------------------------

    int sum_rows(int a) {
        Eigen::VectorXd v = mat(a).rowwise().sum();
        const int n = cols(a);
        return push(rows(a), 1, std::move(v), requires_grad(a),
                    [a, n](Tape& tp, int g, std::vector<int>& go) {
                        tp.accum(go, a, tp.bcast_col(g, n));
                    });
    }

    int sum_all(int a) {
        Eigen::VectorXd v = Eigen::VectorXd::Constant(1, val(a).sum());
        const int r = rows(a), c = cols(a);
        return push(1, 1, std::move(v), requires_grad(a),
                    [a, r, c](Tape& tp, int g, std::vector<int>& go) {
                        tp.accum(go, a, tp.bcast_all(g, r, c));
                    });
    }

    int bcast_col(int a, int n) {
        check(cols(a) == 1, "bcast_col: input must be m x 1");
        const int m = rows(a);
        Eigen::VectorXd v(static_cast<Eigen::Index>(m) * n);
        MapT(v.data(), m, n).colwise() = val(a);
        return push(m, n, std::move(v), requires_grad(a),
                    [a](Tape& tp, int g, std::vector<int>& go) {
                        tp.accum(go, a, tp.sum_rows(g));
                    });
    }

    int bcast_row(int a, int m) {
        check(rows(a) == 1, "bcast_row: input must be 1 x n");
        const int n = cols(a);
        Eigen::VectorXd v(static_cast<Eigen::Index>(m) * n);
        MapT(v.data(), m, n).rowwise() = val(a).transpose();
        return push(m, n, std::move(v), requires_grad(a),
                    [a, m](Tape& tp, int g, std::vector<int>& go) {
                        // adjoint of row broadcast: column sums
                        tp.accum(go, a, tp.matmul(tp.ones(1, m), g));
                    });
    }

    int bcast_all(int a, int r, int c) {
        check(count(a) == 1, "bcast_all: input must be 1x1");
        Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(r) * c, val(a)[0]);
        return push(r, c, std::move(v), requires_grad(a),
                    [a](Tape& tp, int g, std::vector<int>& go) {
                        tp.accum(go, a, tp.sum_all(g));
                    });
    }

    // ---- data movement ---------------------------------------------------

    int reshape(int a, int r, int c) {
        check(r * c == count(a), "reshape: element count mismatch");
        Eigen::VectorXd v = val(a);
        const int ar = rows(a), ac = cols(a);
        return push(r, c, std::move(v), requires_grad(a),
                    [a, ar, ac](Tape& tp, int g, std::vector<int>& go) {
                        tp.accum(go, a, tp.reshape(g, ar, ac));
                    });
    }

    /// out[i] = map[i] < 0 ? 0 : in[map[i]]. Covers slicing, tiling,
    /// permutation, im2col and zero padding.
    int gather(int a, const IdxMap& map, int r, int c) {
        check(static_cast<int>(map->size()) == r * c, "gather: map size mismatch");
        const Eigen::VectorXd& x = val(a);
        Eigen::VectorXd v(static_cast<Eigen::Index>(r) * c);
        const auto& m = *map;
        for (size_t i = 0; i < m.size(); ++i) v[static_cast<Eigen::Index>(i)] = m[i] < 0 ? 0.0 : x[m[i]];
        const int ar = rows(a), ac = cols(a);
        return push(r, c, std::move(v), requires_grad(a),
                    [a, map, ar, ac](Tape& tp, int g, std::vector<int>& go) {
                        tp.accum(go, a, tp.scatter_add(g, map, ar, ac));
                    });
    }

    /// out[map[i]] += in[i]; entries with map[i] < 0 are dropped.
    int scatter_add(int a, const IdxMap& map, int r, int c) {
        check(static_cast<int>(map->size()) == count(a), "scatter_add: map size mismatch");
        const Eigen::VectorXd& x = val(a);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(r) * c);
        const auto& m = *map;
        for (size_t i = 0; i < m.size(); ++i)
            if (m[i] >= 0) v[m[i]] += x[static_cast<Eigen::Index>(i)];
        const int ar = rows(a), ac = cols(a);
        return push(r, c, std::move(v), requires_grad(a),
                    [a, map, ar, ac](Tape& tp, int g, std::vector<int>& go) {
                        tp.accum(go, a, tp.gather(g, map, ar, ac));
                    });
    }

    int concat_rows(const std::vector<int>& parts) {
        check(!parts.empty(), "concat_rows: empty");
        const int c = cols(parts[0]);
        int r = 0;
        bool req = false;
        for (int p : parts) {
            check(cols(p) == c, "concat_rows: column mismatch");
            r += rows(p);
            req = req || requires_grad(p);
        }
        Eigen::VectorXd v(static_cast<Eigen::Index>(r) * c);
        Eigen::Index off = 0;
        for (int p : parts) {
            v.segment(off, val(p).size()) = val(p);
            off += val(p).size();
        }
        return push(r, c, std::move(v), req,
                    [parts](Tape& tp, int g, std::vector<int>& go) {
                        int r0 = 0;
                        for (int p : parts) {
                            const int r1 = r0 + tp.rows(p);
                            if (tp.requires_grad(p)) tp.accum(go, p, tp.slice_rows(g, r0, r1));
                            r0 = r1;
                        }
                    });
    }

    int slice_rows(int a, int r0, int r1) {
        check(0 <= r0 && r0 < r1 && r1 <= rows(a), "slice_rows: bad range");
        const int c = cols(a);
        Eigen::VectorXd v = val(a).segment(static_cast<Eigen::Index>(r0) * c,
                                           static_cast<Eigen::Index>(r1 - r0) * c);
        const int ar = rows(a);
        return push(r1 - r0, c, std::move(v), requires_grad(a),
                    [a, r0, r1, ar, c](Tape& tp, int g, std::vector<int>& go) {
                        // pad back to the source height with zero blocks
                        std::vector<int> parts;
                        if (r0 > 0) parts.push_back(tp.zeros(r0, c));
                        parts.push_back(g);
                        if (r1 < ar) parts.push_back(tp.zeros(ar - r1, c));
                        tp.accum(go, a, parts.size() == 1 ? g : tp.concat_rows(parts));
                    });
    }

    int concat_cols(const std::vector<int>& parts) {
        check(!parts.empty(), "concat_cols: empty");
        const int r = rows(parts[0]);
        int c = 0;
        bool req = false;
        for (int p : parts) {
            check(rows(p) == r, "concat_cols: row mismatch");
            c += cols(p);
            req = req || requires_grad(p);
        }
        Eigen::VectorXd v(static_cast<Eigen::Index>(r) * c);
        MapT o(v.data(), r, c);
        int c0 = 0;
        for (int p : parts) {
            o.middleCols(c0, cols(p)) = mat(p);
            c0 += cols(p);
        }
        return push(r, c, std::move(v), req,
                    [parts](Tape& tp, int g, std::vector<int>& go) {
                        int c0 = 0;
                        for (int p : parts) {
                            const int c1 = c0 + tp.cols(p);
                            if (tp.requires_grad(p)) tp.accum(go, p, tp.slice_cols(g, c0, c1));
                            c0 = c1;
                        }
                    });
    }

    int slice_cols(int a, int c0, int c1) {
        check(0 <= c0 && c0 < c1 && c1 <= cols(a), "slice_cols: bad range");
        const int r = rows(a);
        Eigen::VectorXd v(static_cast<Eigen::Index>(r) * (c1 - c0));
        MapT(v.data(), r, c1 - c0) = mat(a).middleCols(c0, c1 - c0);
        const int ac = cols(a);
        return push(r, c1 - c0, std::move(v), requires_grad(a),
                    [a, c0, c1, r, ac](Tape& tp, int g, std::vector<int>& go) {
                        std::vector<int> parts;
                        if (c0 > 0) parts.push_back(tp.zeros(r, c0));
                        parts.push_back(g);
                        if (c1 < ac) parts.push_back(tp.zeros(r, ac - c1));
                        tp.accum(go, a, parts.size() == 1 ? g : tp.concat_cols(parts));
                    });
    }

    // ---- compositions ----------------------------------------------------

    /// Row-wise softmax, stabilized by subtracting the (constant) row max.
    int softmax_rows(int a) {
        Eigen::VectorXd mx = mat(a).rowwise().maxCoeff();
        const int shifted = sub(a, bcast_col(constant(rows(a), 1, std::move(mx)), cols(a)));
        const int e = exp_(shifted);
        const int denom = sum_rows(e);
        return mul(e, bcast_col(recip(denom), cols(a)));
    }

    int mean_all(int a) { return scale(sum_all(a), 1.0 / count(a)); }

    int l1_norm(int a) { return sum_all(abs_(a)); }

    int dot(int a, int b) { return sum_all(mul(a, b)); }

    int l2_norm(int a) { return sqrt_(sum_all(mul(a, a))); }

    // ---- reverse sweep ---------------------------------------------------

    /// Propagates d(root)/d(node) for every differentiable ancestor of
    /// `root`. Returns grad node ids (-1 where none) for the nodes that
    /// existed when the sweep started; newly created pullback nodes remain
    /// differentiable, enabling grad-of-grad.
    std::vector<int> backward(int root) {
        check(count(root) == 1, "backward: root must be a scalar node");
        std::vector<int> gradof(static_cast<size_t>(size()), -1);
        gradof[static_cast<size_t>(root)] = ones(1, 1);
        for (int id = root; id >= 0; --id) {
            const int g = gradof[static_cast<size_t>(id)];
            if (g < 0) continue;
            auto& back = nodes_[static_cast<size_t>(id)].back;
            if (back) back(*this, g, gradof);
        }
        return gradof;
    }

private:
    static void check(bool ok, const char* msg) {
        if (!ok) throw std::logic_error(std::string("tape: ") + msg);
    }
    void check_same(int a, int b, const char* op) const {
        check(rows(a) == rows(b) && cols(a) == cols(b),
              (std::string(op) + ": shape mismatch").c_str());
    }
    bool req2(int a, int b) const { return requires_grad(a) || requires_grad(b); }

    void accum(std::vector<int>& gradof, int node, int partial) {
        if (!requires_grad(node)) return;
        if (node >= static_cast<int>(gradof.size())) return;  // pullback-created node
        int& slot = gradof[static_cast<size_t>(node)];
        slot = slot < 0 ? partial : add(slot, partial);
    }

    void matmul_back(int a, int b, bool ta, bool tb, int g, std::vector<int>& go, int blocks) {
        auto mm = [&](int x, int y, bool tx, bool ty) {
            return blocks ? block_matmul(x, y, blocks, tx, ty) : matmul(x, y, tx, ty);
        };
        if (requires_grad(a)) {
            int ga;
            if (!ta && !tb) ga = mm(g, b, false, true);
            else if (!ta && tb) ga = mm(g, b, false, false);
            else if (!tb) ga = mm(b, g, false, true);
            else ga = mm(b, g, true, true);
            accum(go, a, ga);
        }
        if (requires_grad(b)) {
            int gb;
            if (!ta && !tb) gb = mm(a, g, true, false);
            else if (!ta && tb) gb = mm(g, a, true, false);
            else if (!tb) gb = mm(a, g, false, false);
            else gb = mm(g, a, true, true);
            accum(go, b, gb);
        }
    }

    template <typename F>
    int push(int r, int c, Eigen::VectorXd v, bool req, F&& back) {
        Node n;
        n.rows = r;
        n.cols = c;
        n.v = std::move(v);
        n.req = req;
        if constexpr (!std::is_same_v<std::decay_t<F>, std::nullptr_t>) {
            if (req) n.back = std::forward<F>(back);
        }
        nodes_.push_back(std::move(n));
        return size() - 1;
    }

    void set_back(int id, std::function<void(Tape&, int, std::vector<int>&)> back) {
        if (nodes_[static_cast<size_t>(id)].req) nodes_[static_cast<size_t>(id)].back = std::move(back);
    }

    std::vector<Node> nodes_;
};

}  // namespace netsimp::nn

#endif  // NETSIMP_NN_TAPE_HPP
