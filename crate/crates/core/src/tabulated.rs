//! Functions given by values on a rectilinear grid in one or two dimensions.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::oracle::{FunctionOracle, Properties};
use crate::sampling::{cartesian, Point};

/// Grid values, row-major with the last axis varying fastest (the order of
/// [`cartesian`]). Off-grid queries interpolate multilinearly; queries
/// outside the grid box are `+inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedFunction {
    axes: Vec<Vec<f64>>,
    values: Vec<ExtReal>,
}

/// A tabulated value and whether it came from interpolation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lookup {
    pub value: ExtReal,
    pub interpolated: bool,
}

impl TabulatedFunction {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<ExtReal>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::invalid(format!("tabulated functions support 1 or 2 axes, got {}", axes.len())));
        }
        for axis in &axes {
            if axis.len() < 2 || axis.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::invalid("grid axes need >= 2 strictly increasing nodes"));
            }
        }
        let expected: usize = axes.iter().map(Vec::len).product();
        if values.len() != expected {
            return Err(Error::invalid(format!("expected {expected} grid values, got {}", values.len())));
        }
        Ok(TabulatedFunction { axes, values })
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn nodes(&self) -> Vec<Point> {
        cartesian(&self.axes)
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        match idx {
            [i] => *i,
            [i, j] => i * self.axes[1].len() + j,
            _ => unreachable!(),
        }
    }

    pub fn node_value(&self, idx: &[usize]) -> ExtReal {
        self.values[self.flat_index(idx)]
    }

    pub fn lookup(&self, x: &[f64]) -> Result<Lookup> {
        crate::error::check_dim(self.dim(), x.len())?;
        // Per axis: (lower index, weight of the upper node).
        let mut cells = Vec::with_capacity(self.dim());
        let mut interpolated = false;
        for (axis, &v) in self.axes.iter().zip(x) {
            let (lo, hi) = (axis[0], axis[axis.len() - 1]);
            if !(lo <= v && v <= hi) {
                return Ok(Lookup { value: ExtReal::PosInf, interpolated: true });
            }
            match axis.binary_search_by(|a| a.partial_cmp(&v).unwrap()) {
                Ok(i) => cells.push((i, 0.0)),
                Err(i) => {
                    let (a, b) = (axis[i - 1], axis[i]);
                    cells.push((i - 1, (v - a) / (b - a)));
                    interpolated = true;
                }
            }
        }
        let mut acc = 0.0;
        let corners = 1usize << self.dim();
        for mask in 0..corners {
            let mut w = 1.0;
            let mut idx = Vec::with_capacity(self.dim());
            for (d, &(i, frac)) in cells.iter().enumerate() {
                if mask & (1 << d) != 0 {
                    w *= frac;
                    idx.push(i + 1);
                } else {
                    w *= 1.0 - frac;
                    idx.push(i);
                }
            }
            if w == 0.0 {
                continue;
            }
            match self.node_value(&idx) {
                ExtReal::Finite(v) => acc += w * v,
                ExtReal::PosInf => return Ok(Lookup { value: ExtReal::PosInf, interpolated }),
            }
        }
        Ok(Lookup { value: ExtReal::finite(acc)?, interpolated })
    }

    pub fn into_oracle(self, name: impl Into<String>, properties: Properties) -> FunctionOracle {
        let dim = self.dim();
        FunctionOracle::try_new(name, dim, properties, move |x| Ok(self.lookup(x)?.value))
    }

    /// CSV with columns `x0[,x1],value`; `+inf` is written as `inf`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (0..self.dim()).map(|i| format!("x{i}")).collect();
        header.push("value".into());
        out.write_record(&header).map_err(csv_err)?;
        for (node, v) in self.nodes().iter().zip(&self.values) {
            let mut row: Vec<String> = node.iter().map(|c| c.to_string()).collect();
            row.push(v.to_string());
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(())
    }

    /// Reads the format written by [`TabulatedFunction::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let dim = rdr.headers().map_err(csv_err)?.len().saturating_sub(1);
        if dim == 0 {
            return Err(Error::invalid("tabulated CSV needs coordinate columns"));
        }
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let coords: Vec<f64> = (0..dim)
                .map(|i| rec[i].parse::<f64>().map_err(|e| Error::invalid(e.to_string())))
                .collect::<Result<_>>()?;
            let v = match &rec[dim] {
                "inf" => ExtReal::PosInf,
                s => ExtReal::finite(s.parse::<f64>().map_err(|e| Error::invalid(e.to_string()))?)?,
            };
            nodes.push(coords);
            values.push(v);
        }
        let mut axes = Vec::with_capacity(dim);
        for d in 0..dim {
            let mut axis: Vec<f64> = nodes.iter().map(|p: &Vec<f64>| p[d]).collect();
            axis.sort_by(|a, b| a.partial_cmp(b).unwrap());
            axis.dedup();
            axes.push(axis);
        }
        let table = TabulatedFunction::new(axes, values)?;
        if table.nodes() != nodes {
            return Err(Error::invalid("CSV rows are not in grid order"));
        }
        Ok(table)
    }
}

/// Brute-force min-plus convolution on a grid:
/// `(f ▽ g)(u) = min_{v in grid} f(u - v) + g(v)` at every grid node `u`,
/// `+inf` where no `v` gives a finite sum.
pub fn min_plus(f: &FunctionOracle, g: &FunctionOracle, axes: Vec<Vec<f64>>) -> Result<TabulatedFunction> {
    let dim = axes.len();
    crate::error::check_dim(f.dim(), dim)?;
    crate::error::check_dim(g.dim(), dim)?;
    let nodes = cartesian(&axes);
    let gv: Vec<(Point, f64)> = nodes
        .par_iter()
        .map(|v| Ok((v.clone(), g.eval(v)?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter_map(|(v, gv): (Point, ExtReal)| gv.as_finite().map(|x| (v, x)))
        .collect();
    let values = nodes
        .par_iter()
        .map(|u| {
            let mut best = ExtReal::PosInf;
            let mut diff = vec![0.0; dim];
            for (v, g_v) in &gv {
                for i in 0..dim {
                    diff[i] = u[i] - v[i];
                }
                if let ExtReal::Finite(f_uv) = f.eval(&diff)? {
                    best = best.min(ExtReal::finite(f_uv + g_v)?);
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    TabulatedFunction::new(axes, values)
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}
