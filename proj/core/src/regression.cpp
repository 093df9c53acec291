#include "abcd/regression.hpp"

#include <cmath>
#include <set>

#include "abcd/distributions.hpp"
#include "abcd/errors.hpp"

namespace abcd {

void DesignMatrix::add_intercept() { add("const", Eigen::VectorXd::Ones(n())); }

void DesignMatrix::add(const std::string& name, const Eigen::VectorXd& column) {
    if (column.size() != n()) throw Error("column '" + name + "' has wrong length");
    for (const auto& existing : names) {
        if (existing == name) throw Error("duplicate regressor name '" + name + "'");
    }
    values.conservativeResize(Eigen::NoChange, values.cols() + 1);
    values.col(values.cols() - 1) = column;
    names.push_back(name);
}

void DesignMatrix::add(const std::string& name, const std::vector<double>& column) {
    add(name, Eigen::Map<const Eigen::VectorXd>(column.data(),
                                                static_cast<Eigen::Index>(column.size())));
}

DesignMatrix DesignMatrix::with_intercept(Eigen::Index n) {
    DesignMatrix dm(n);
    dm.add_intercept();
    return dm;
}

int RegressionFit::index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

double RegressionFit::coef_of(const std::string& name) const {
    const int i = index(name);
    if (i < 0) throw Error("no regressor named '" + name + "'");
    return coef(i);
}

double RegressionFit::se_of(const std::string& name) const {
    const int i = index(name);
    if (i < 0) throw Error("no regressor named '" + name + "'");
    return std_error(i);
}

double RegressionFit::p_of(const std::string& name) const {
    const int i = index(name);
    if (i < 0) throw Error("no regressor named '" + name + "'");
    return p_value(i);
}

OlsCore ols_core(const DesignMatrix& X, const Eigen::VectorXd& y) {
    const Eigen::Index n = X.n();
    const Eigen::Index k = X.k();
    if (y.size() != n) throw Error("response length does not match design rows");
    if (n <= k) {
        throw InsufficientDataError("need n > k; got n = " + std::to_string(n) +
                                    ", k = " + std::to_string(k));
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X.values);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        const auto& perm = qr.colsPermutation().indices();
        const std::string dependent = X.names[perm(qr.rank())];
        throw SingularDesignError("design matrix is rank deficient; column '" + dependent +
                                  "' is linearly dependent on earlier columns");
    }

    OlsCore core;
    core.coef = qr.solve(y);
    core.residuals = y - X.values * core.coef;
    core.rss = core.residuals.squaredNorm();

    // (X'X)^-1 = P (R'R)^-1 P' from the pivoted factorization X P = Q R.
    const Eigen::MatrixXd R =
        qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd inv_permuted = r_inv * r_inv.transpose();
    const auto& P = qr.colsPermutation();
    core.xtx_inv = P * inv_permuted * P.transpose();
    return core;
}

RegressionFit ols_fit(const DesignMatrix& X, const Eigen::VectorXd& y, StandardErrors se) {
    OlsCore core = ols_core(X, y);
    const Eigen::Index n = X.n();
    const Eigen::Index k = X.k();
    const double df = static_cast<double>(n - k);

    RegressionFit fit;
    fit.names = X.names;
    fit.coef = core.coef;
    fit.rss = core.rss;
    fit.n = n;
    fit.df_resid = n - k;

    Eigen::MatrixXd cov;
    if (se == StandardErrors::Classical) {
        cov = (core.rss / df) * core.xtx_inv;
    } else {
        // HC1: (X'X)^-1 X' diag(e^2) X (X'X)^-1 scaled by n/(n-k).
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::VectorXd xi = X.values.row(i);
            meat.noalias() += core.residuals(i) * core.residuals(i) * xi * xi.transpose();
        }
        cov = core.xtx_inv * meat * core.xtx_inv * (static_cast<double>(n) / df);
    }

    fit.std_error = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.t_value.resize(k);
    fit.p_value.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        fit.t_value(j) = fit.std_error(j) > 0.0
                             ? fit.coef(j) / fit.std_error(j)
                             : std::numeric_limits<double>::quiet_NaN();
        fit.p_value(j) = dist::t_two_sided_p(fit.t_value(j), df);
    }

    const double mean = y.mean();
    const double tss = (y.array() - mean).matrix().squaredNorm();
    if (tss > 0.0) {
        fit.r2 = 1.0 - core.rss / tss;
        if (fit.r2 < 0.0) fit.r2 = 0.0;
        fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / df;
    } else {
        fit.r2 = 0.0;
        fit.adj_r2 = 0.0;
    }
    return fit;
}

FTest f_test_nested(const RegressionFit& full, const RegressionFit& restricted, int q) {
    if (q < 1) throw NestingError("number of restrictions q must be >= 1");
    if (full.n != restricted.n) {
        throw NestingError("full and restricted models were fitted on different n");
    }
    const std::set<std::string> full_names(full.names.begin(), full.names.end());
    for (const auto& name : restricted.names) {
        if (!full_names.count(name)) {
            throw NestingError("restricted regressor '" + name + "' missing from full model");
        }
    }
    const double tol = 1e-8 * (1.0 + full.rss);
    if (restricted.rss < full.rss - tol) {
        throw NestingError("restricted RSS below full RSS; models are not nested");
    }

    FTest out;
    const double num = std::max(0.0, restricted.rss - full.rss) / q;
    const double den = full.rss / static_cast<double>(full.df_resid);
    if (den <= 0.0) {
        out.f = num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        out.p = num > 0.0 ? 0.0 : 1.0;
        return out;
    }
    out.f = num / den;
    out.p = 1.0 - dist::f_cdf(out.f, q, static_cast<double>(full.df_resid));
    return out;
}

}  // namespace abcd
