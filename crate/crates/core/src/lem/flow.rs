//! D8 flow routing and drainage-area accumulation.

use crate::lem::grid::GridTopography;
use crate::scalar::Real;

/// Neighbor offsets scanned in this order; ties keep the earliest.
pub(crate) const NEIGHBORS: [(isize, isize); 8] = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)];

/// Steepest-descent routing for every cell of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField<T> {
    /// Receiving cell per cell; a cell with no strictly lower neighbor receives itself.
    pub receiver: Vec<usize>,
    /// Upstream cell count including the cell itself.
    pub cells: Vec<usize>,
    /// Drainage area in m².
    pub area: Vec<T>,
    /// Topological order: every donor precedes its receiver.
    pub order: Vec<usize>,
}

impl<T: Real> FlowField<T> {
    pub fn is_outlet(&self, i: usize) -> bool {
        self.receiver[i] == i
    }
}

pub fn flow_route<T: Real>(topo: &GridTopography<T>) -> FlowField<T> {
    let mut scratch = RoutingScratch::default();
    let mut field = FlowField { receiver: Vec::new(), cells: Vec::new(), area: Vec::new(), order: Vec::new() };
    route_into(topo.rows(), topo.cols(), topo.elevations(), &mut scratch, &mut field.receiver, &mut field.cells, &mut field.order);
    let cell_area = topo.cell_size() * topo.cell_size();
    field.area = field.cells.iter().map(|&n| T::lit(n as f64) * cell_area).collect();
    field
}

#[derive(Default)]
pub(crate) struct RoutingScratch {
    pending: Vec<u32>,
    stack: Vec<usize>,
}

/// Routing on a raw row-major buffer; also handles single-row strips.
pub(crate) fn route_into<T: Real>(
    rows: usize,
    cols: usize,
    h: &[T],
    scratch: &mut RoutingScratch,
    receiver: &mut Vec<usize>,
    cells: &mut Vec<usize>,
    order: &mut Vec<usize>,
) {
    let n = rows * cols;
    receiver.clear();
    receiver.extend(0..n);
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            let mut best = h[i];
            for &(dr, dc) in &NEIGHBORS {
                let rr = r as isize + dr;
                let cc = c as isize + dc;
                if rr < 0 || cc < 0 || rr >= rows as isize || cc >= cols as isize {
                    continue;
                }
                let j = rr as usize * cols + cc as usize;
                if h[j] < best {
                    best = h[j];
                    receiver[i] = j;
                }
            }
        }
    }

    // Kahn's algorithm over the receiver forest: leaves (no donors) first.
    let pending = &mut scratch.pending;
    pending.clear();
    pending.resize(n, 0);
    for i in 0..n {
        if receiver[i] != i {
            pending[receiver[i]] += 1;
        }
    }
    let stack = &mut scratch.stack;
    stack.clear();
    stack.extend((0..n).filter(|&i| pending[i] == 0));
    order.clear();
    cells.clear();
    cells.resize(n, 1);
    while let Some(i) = stack.pop() {
        order.push(i);
        let r = receiver[i];
        if r != i {
            cells[r] += cells[i];
            pending[r] -= 1;
            if pending[r] == 0 {
                stack.push(r);
            }
        }
    }
    debug_assert_eq!(order.len(), n);
}
