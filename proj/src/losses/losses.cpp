#include "losses/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace scmc {

void Hyperparams::validate() const {
    if (gamma1 < 0.0 || gamma2 < 0.0 || gamma3 < 0.0)
        throw std::invalid_argument("Hyperparams: gamma weights must be nonnegative");
    if (!(tau > 0.0)) throw std::invalid_argument("Hyperparams: tau must be positive");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("Hyperparams: learning rate must be positive");
    if (pretrain_epochs < 1 || train_epochs < 1)
        throw std::invalid_argument("Hyperparams: epoch counts must be >= 1");
}

double reconstruction_loss(const std::vector<Matrix>& x, const std::vector<Matrix>& xhat) {
    if (x.size() != xhat.size())
        throw std::invalid_argument("reconstruction_loss: view count mismatch");
    double s = 0.0;
    for (std::size_t v = 0; v < x.size(); ++v) {
        if (!x[v].same_shape(xhat[v]))
            throw std::invalid_argument("reconstruction_loss: shape mismatch in view " +
                                        std::to_string(v));
        s += frob_sq(sub(x[v], xhat[v]));
    }
    return s;
}

double subspace_loss(const std::vector<Matrix>& c, const std::vector<Matrix>& z) {
    if (c.size() != z.size()) throw std::invalid_argument("subspace_loss: view count mismatch");
    double s = 0.0;
    for (std::size_t v = 0; v < c.size(); ++v) {
        if (z[v].rows() != z[v].cols() || z[v].rows() != c[v].rows())
            throw std::invalid_argument("subspace_loss: shape mismatch in view " +
                                        std::to_string(v));
        // |C^T - C^T Z|_F = |C - Z^T C|_F
        s += frob_sq(sub(c[v], matmul_tn(z[v], c[v])));
    }
    return s;
}

double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine_similarity: length mismatch");
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uu += u[i] * u[i];
        vv += v[i] * v[i];
        uv += u[i] * v[i];
    }
    const double nu = std::sqrt(uu), nv = std::sqrt(vv);
    if (nu < 1e-12 || nv < 1e-12) return 0.0;
    return uv / (nu * nv);
}

namespace {

// Rows of m, L2-normalized; zero rows stay zero.
Matrix normalize_rows(const Matrix& m) {
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
        const double nrm = std::sqrt(s);
        const double inv = nrm < 1e-12 ? 0.0 : 1.0 / nrm;
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) *= inv;
    }
    return out;
}

}  // namespace

double view_contrastive_loss(std::size_t v, const std::vector<Matrix>& z, double tau,
                             ContrastAudit* audit) {
    const std::size_t V = z.size();
    if (V < 2) throw std::invalid_argument("view_contrastive_loss: needs at least 2 views");
    if (v >= V) throw std::invalid_argument("view_contrastive_loss: view index out of range");
    if (!(tau > 0.0)) throw std::invalid_argument("view_contrastive_loss: tau must be positive");
    const std::size_t N = z[0].rows();
    for (const auto& m : z)
        if (m.rows() != N || m.cols() != z[0].cols())
            throw std::invalid_argument("view_contrastive_loss: Z shapes disagree");

    std::vector<Matrix> hat(V);
    for (std::size_t k = 0; k < V; ++k) hat[k] = normalize_rows(z[k]);
    const Matrix intra = matmul_nt(hat[v], hat[v]);

    double loss = 0.0;
    for (std::size_t k = 0; k < V; ++k) {
        if (k == v) continue;
        const Matrix cross = matmul_nt(hat[v], hat[k]);
        for (std::size_t i = 0; i < N; ++i) {
            double denom = 0.0;
            for (std::size_t j = 0; j < N; ++j) {
                if (j != i) denom += std::exp(intra(i, j) / tau);
                denom += std::exp(cross(i, j) / tau);
            }
            loss += std::log(denom) - cross(i, i) / tau;
        }
    }
    if (audit) {
        // Recount the distinct (view, sample) instances each anchor's
        // numerator and denominators actually index, so the audit is
        // evidence rather than a restatement of the formula.
        audit->uniform = true;
        for (std::size_t i = 0; i < N; ++i) {
            std::size_t pos_seen = 0;
            std::vector<char> neg_seen(V * N, 0);
            for (std::size_t k = 0; k < V; ++k) {
                if (k == v) continue;
                pos_seen += 1;  // numerator instance (k, i)
                for (std::size_t j = 0; j < N; ++j) {
                    if (j != i) neg_seen[v * N + j] = 1;  // intra denominator
                    if (j != i) neg_seen[k * N + j] = 1;  // cross denominator minus positive
                }
            }
            std::size_t neg_count = 0;
            for (char c : neg_seen) neg_count += c;
            if (i == 0) {
                audit->positives_per_anchor = pos_seen;
                audit->negatives_per_anchor = neg_count;
            } else if (pos_seen != audit->positives_per_anchor ||
                       neg_count != audit->negatives_per_anchor) {
                audit->uniform = false;
            }
        }
    }
    return loss;
}

double contrastive_loss(const std::vector<Matrix>& z, double tau) {
    const std::size_t V = z.size();
    if (V < 2) throw std::invalid_argument("contrastive_loss: needs at least 2 views");
    const std::size_t N = z[0].rows();
    double s = 0.0;
    for (std::size_t v = 0; v < V; ++v) s += view_contrastive_loss(v, z, tau);
    return s / (static_cast<double>(N) * static_cast<double>(V));
}

double fusion_loss(const std::vector<Matrix>& z, const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("fusion_loss: A not square");
    const std::size_t N = a.rows();
    Matrix abar = scale(add(a, transpose(a)), 0.5);
    std::vector<double> deg(N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) deg[i] += abar(i, j);
    double total = frob_sq(a);
    for (const auto& zv : z) {
        if (zv.rows() != N) throw std::invalid_argument("fusion_loss: Z size mismatch");
        // sum_ij |z_i - z_j|^2 Abar_ij = 2 tr(Z^T L Z) with L = deg(Abar) - Abar
        const Matrix g = matmul_nt(zv, zv);
        double quad = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            quad += deg[i] * g(i, i);
            for (std::size_t j = 0; j < N; ++j) quad -= abar(i, j) * g(i, j);
        }
        total += 2.0 * quad;
    }
    return total;
}

LossBreakdown total_loss(const ScmcModel& model, const std::vector<Matrix>& x,
                         const Hyperparams& hp) {
    hp.validate();
    if (x.size() != model.num_views) throw std::invalid_argument("total_loss: view count mismatch");
    std::vector<Matrix> c(model.num_views), cz(model.num_views), xhat(model.num_views),
        zs(model.num_views);
    for (std::size_t v = 0; v < model.num_views; ++v) {
        c[v] = encode(model, v, x[v]);
        cz[v] = self_express(model, v, c[v]);
        xhat[v] = decode(model, v, cz[v]);
        zs[v] = model.views[v].z;
    }
    const Matrix a = project_affinity(fuse_affinity(model));
    LossBreakdown b;
    b.re = reconstruction_loss(x, xhat);
    b.sub = subspace_loss(c, zs);
    b.con = contrastive_loss(zs, hp.tau);
    b.fu = fusion_loss(zs, a);
    b.total = b.re + hp.gamma1 * b.sub + hp.gamma2 * b.con + hp.gamma3 * b.fu;
    return b;
}

// ---- differentiable objective ----

void ObjectiveGraph::bind(const ScmcModel& model) {
    for (std::size_t v = 0; v < params.size(); ++v) {
        const auto& p = params[v];
        const auto& mv = model.views[v];
        for (int l = 0; l < 3; ++l) {
            tape.bind(p.enc_w[l], mv.enc_w[l]);
            tape.bind(p.enc_b[l], mv.enc_b[l]);
            tape.bind(p.dec_w[l], mv.dec_w[l]);
            tape.bind(p.dec_b[l], mv.dec_b[l]);
        }
        tape.bind(p.z, mv.z);
    }
    tape.bind(omega, model.omega_logits);
}

LossBreakdown ObjectiveGraph::breakdown(const Hyperparams& hp) const {
    LossBreakdown b;
    b.re = re_node >= 0 ? tape.value_of(re_node)(0, 0) : 0.0;
    b.sub = sub_node >= 0 ? tape.value_of(sub_node)(0, 0) : 0.0;
    b.con = con_node >= 0 ? tape.value_of(con_node)(0, 0) : 0.0;
    b.fu = fu_node >= 0 ? tape.value_of(fu_node)(0, 0) : 0.0;
    b.total = tape.value_of(total_node)(0, 0);
    return b;
}

ObjectiveGraph build_objective(const ScmcModel& model, const std::vector<Matrix>& x,
                               const Hyperparams& hp, unsigned mask) {
    hp.validate();
    if (!(mask & kLossRe))
        throw std::invalid_argument("build_objective: reconstruction term is mandatory");
    if (x.size() != model.num_views)
        throw std::invalid_argument("build_objective: view count mismatch");
    const std::size_t V = model.num_views;
    const std::size_t N = model.num_samples;

    ObjectiveGraph g;
    g.mask = mask;
    diff::Tape& t = g.tape;

    std::vector<diff::NodeId> x_nodes(V), z_nodes(V);
    std::vector<diff::NodeId> re_terms, sub_terms;
    for (std::size_t v = 0; v < V; ++v) {
        const std::string pre = "v" + std::to_string(v) + ".";
        const auto& mv = model.views[v];
        ObjectiveGraph::ViewParamIds p;
        x_nodes[v] = t.constant(x[v], pre + "x");
        for (int l = 0; l < 3; ++l) {
            const std::string ls = std::to_string(l);
            p.enc_w[l] = t.input(pre + "enc_w" + ls, mv.enc_w[l].rows(), mv.enc_w[l].cols(), true);
            p.enc_b[l] = t.input(pre + "enc_b" + ls, 1, mv.enc_b[l].cols(), true);
            p.dec_w[l] = t.input(pre + "dec_w" + ls, mv.dec_w[l].rows(), mv.dec_w[l].cols(), true);
            p.dec_b[l] = t.input(pre + "dec_b" + ls, 1, mv.dec_b[l].cols(), true);
        }
        p.z = t.input(pre + "z", N, N, true);
        z_nodes[v] = p.z;

        // encoder: three tanh layers
        diff::NodeId h = x_nodes[v];
        for (int l = 0; l < 3; ++l)
            h = t.tanh(t.add_rowvec(t.matmul(h, p.enc_w[l]), p.enc_b[l]));
        const diff::NodeId c_node = h;
        g.embed_nodes.push_back(c_node);

        // self-expression (row form) and decoder: tanh, tanh, linear
        const diff::NodeId cz = t.matmul(t.transpose(p.z), c_node);
        diff::NodeId d = t.tanh(t.add_rowvec(t.matmul(cz, p.dec_w[0]), p.dec_b[0]));
        d = t.tanh(t.add_rowvec(t.matmul(d, p.dec_w[1]), p.dec_b[1]));
        const diff::NodeId xhat = t.add_rowvec(t.matmul(d, p.dec_w[2]), p.dec_b[2]);

        re_terms.push_back(t.frob_sq(t.sub(x_nodes[v], xhat)));
        if (mask & kLossSub) sub_terms.push_back(t.frob_sq(t.sub(c_node, cz)));
        g.params.push_back(p);
    }

    auto sum_terms = [&](const std::vector<diff::NodeId>& terms) {
        diff::NodeId s = terms[0];
        for (std::size_t i = 1; i < terms.size(); ++i) s = t.add(s, terms[i]);
        return s;
    };

    g.re_node = sum_terms(re_terms);
    if (mask & kLossSub) g.sub_node = sum_terms(sub_terms);

    // contrastive term
    if (mask & kLossCon) {
        Matrix offdiag(N, N, 1.0), ident(N, N, 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            offdiag(i, i) = 0.0;
            ident(i, i) = 1.0;
        }
        const diff::NodeId offdiag_c = t.constant(std::move(offdiag), "offdiag_mask");
        const diff::NodeId ident_c = t.constant(std::move(ident), "diag_mask");
        const double inv_tau = 1.0 / hp.tau;

        // Unique grams for v <= k; S^(kv) is the transpose of S^(vk).
        std::vector<std::vector<diff::NodeId>> gram(V, std::vector<diff::NodeId>(V, -1));
        for (std::size_t v = 0; v < V; ++v)
            for (std::size_t k = v; k < V; ++k)
                gram[v][k] = t.cosine_gram(z_nodes[v], z_nodes[k]);
        auto gram_at = [&](std::size_t v, std::size_t k) {
            if (v <= k) return gram[v][k];
            if (gram[v][k] < 0) gram[v][k] = t.transpose(gram[k][v]);
            return gram[v][k];
        };

        // Per-view intra denominator row sums (diagonal excluded).
        std::vector<diff::NodeId> intra_rowsum(V);
        for (std::size_t v = 0; v < V; ++v) {
            const diff::NodeId e = t.exp(t.scale(gram[v][v], inv_tau));
            intra_rowsum[v] = t.rowsum(t.hadamard(e, offdiag_c));
        }

        std::vector<diff::NodeId> con_terms;
        for (std::size_t v = 0; v < V; ++v) {
            for (std::size_t k = 0; k < V; ++k) {
                if (k == v) continue;
                const diff::NodeId s_vk = gram_at(v, k);
                const diff::NodeId cross = t.exp(t.scale(s_vk, inv_tau));
                const diff::NodeId denom = t.add(intra_rowsum[v], t.rowsum(cross));
                const diff::NodeId log_denom = t.sum(t.log(denom));
                const diff::NodeId pos = t.scale(t.sum(t.hadamard(s_vk, ident_c)), inv_tau);
                con_terms.push_back(t.sub(log_denom, pos));
            }
        }
        g.con_node = t.scale(sum_terms(con_terms), 1.0 / (static_cast<double>(N) * V));
    }

    // fusion term (affinity built from softmax-weighted Z sum)
    if (mask & kLossFu) {
        g.omega = t.input("omega", 1, V, true);
        g.omega_weights_node = t.softmax_row(g.omega);
        diff::NodeId a_raw = -1;
        for (std::size_t v = 0; v < V; ++v) {
            const diff::NodeId term =
                t.scalar_mul(t.elem(g.omega_weights_node, 0, v), z_nodes[v]);
            a_raw = (a_raw < 0) ? term : t.add(a_raw, term);
        }
        g.affinity_node = t.affinity_project(a_raw);
        const diff::NodeId abar =
            t.scale(t.add(g.affinity_node, t.transpose(g.affinity_node)), 0.5);
        const diff::NodeId deg = t.rowsum(abar);
        std::vector<diff::NodeId> fu_terms;
        for (std::size_t v = 0; v < V; ++v) {
            const diff::NodeId gmat = t.matmul(z_nodes[v], t.transpose(z_nodes[v]));
            const diff::NodeId r = t.rowsum(t.hadamard(z_nodes[v], z_nodes[v]));
            const diff::NodeId quad =
                t.sub(t.sum(t.hadamard(r, deg)), t.sum(t.hadamard(abar, gmat)));
            fu_terms.push_back(t.scale(quad, 2.0));
        }
        fu_terms.push_back(t.frob_sq(g.affinity_node));
        g.fu_node = sum_terms(fu_terms);
    } else {
        // omega still exists as a (inert) trainable input so ablated runs
        // keep the same parameter set and checkpoint layout.
        g.omega = t.input("omega", 1, V, true);
    }

    diff::NodeId total = g.re_node;
    if (g.sub_node >= 0) total = t.add(total, t.scale(g.sub_node, hp.gamma1));
    if (g.con_node >= 0) total = t.add(total, t.scale(g.con_node, hp.gamma2));
    if (g.fu_node >= 0) total = t.add(total, t.scale(g.fu_node, hp.gamma3));
    g.total_node = total;
    t.set_root(total);
    g.bind(model);
    return g;
}

}  // namespace scmc
