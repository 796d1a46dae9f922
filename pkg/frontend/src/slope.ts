// Least-squares slope of log(error) against log(dt), mirroring the
// simulator's own fit so the footer cross-check compares like with like.

export interface LoglogFit {
  slope: number;
  intercept: number;
  used: number;
}

// Points with non-positive error are skipped (they have no logarithm); fewer
// than two usable points means there is nothing to fit.
export function fitLoglogSlope(dt: number[], error: number[]): LoglogFit | null {
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i < dt.length; i++) {
    if (dt[i] > 0 && error[i] > 0) {
      xs.push(Math.log10(dt[i]));
      ys.push(Math.log10(error[i]));
    }
  }
  if (xs.length < 2) return null;
  const n = xs.length;
  const xbar = xs.reduce((a, b) => a + b, 0) / n;
  const ybar = ys.reduce((a, b) => a + b, 0) / n;
  let sxy = 0;
  let sxx = 0;
  for (let i = 0; i < n; i++) {
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
  }
  const slope = sxy / sxx;
  return { slope, intercept: ybar - slope * xbar, used: n };
}
