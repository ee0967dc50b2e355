//! Tensor values, the autodiff graph, and the backward pass.

use std::cell::RefCell;
use std::collections::HashSet;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::{Error, Result};

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

/// Per-parent gradient routine: accumulates the contribution of parent
/// `idx` into its gradient buffer given the node's output gradient.
pub(crate) type BackwardFn = Box<dyn Fn(usize, &[f64], &mut [f64])>;

pub(crate) struct Node {
    pub(crate) id: u64,
    pub(crate) shape: Vec<usize>,
    pub(crate) values: Vec<f64>,
    /// Leaf marked as trainable.
    pub(crate) requires_grad: bool,
    /// True when a trainable leaf is reachable through this node.
    pub(crate) tracked: bool,
    pub(crate) grad: RefCell<Option<Vec<f64>>>,
    pub(crate) parents: Vec<Tensor>,
    pub(crate) backward: Option<BackwardFn>,
}

/// An immutable value in the computation graph.
///
/// Cloning is cheap (reference-counted). Tensors built by operations keep
/// handles to their parents; gradients materialize on trainable leaves
/// after [`backward`].
#[derive(Clone)]
pub struct Tensor {
    pub(crate) node: Rc<Node>,
}

impl std::fmt::Debug for Tensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tensor")
            .field("shape", &self.node.shape)
            .field("requires_grad", &self.node.requires_grad)
            .finish()
    }
}

fn check_shape_data(shape: &[usize], len: usize) -> Result<()> {
    let numel: usize = shape.iter().product();
    if shape.is_empty() || numel != len {
        return Err(Error::shape(
            "tensor",
            format!("shape {shape:?} does not hold {len} values"),
        ));
    }
    Ok(())
}

impl Tensor {
    /// Constant (non-trainable) tensor.
    pub fn constant(shape: &[usize], values: Vec<f64>) -> Result<Tensor> {
        check_shape_data(shape, values.len())?;
        Self::leaf(shape.to_vec(), values, false)
    }

    /// Trainable leaf; receives a gradient on backward.
    pub fn parameter(shape: &[usize], values: Vec<f64>) -> Result<Tensor> {
        check_shape_data(shape, values.len())?;
        Self::leaf(shape.to_vec(), values, true)
    }

    pub fn scalar(value: f64) -> Tensor {
        Self::leaf(vec![1], vec![value], false).expect("finite scalar")
    }

    pub fn zeros(shape: &[usize]) -> Tensor {
        let numel = shape.iter().product();
        Self::leaf(shape.to_vec(), vec![0.0; numel], false).expect("zeros are finite")
    }

    fn leaf(shape: Vec<usize>, values: Vec<f64>, requires_grad: bool) -> Result<Tensor> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite tensor value at index {i}: {}",
                values[i]
            )));
        }
        Ok(Tensor {
            node: Rc::new(Node {
                id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
                shape,
                values,
                requires_grad,
                tracked: requires_grad,
                grad: RefCell::new(None),
                parents: Vec::new(),
                backward: None,
            }),
        })
    }

    /// Internal constructor for operation results; validates finiteness so
    /// a NaN/Inf trips a diagnostic at the op that produced it.
    pub(crate) fn from_op(
        shape: Vec<usize>,
        values: Vec<f64>,
        parents: Vec<Tensor>,
        backward: BackwardFn,
    ) -> Result<Tensor> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite value at index {i} produced by an operation: {}",
                values[i]
            )));
        }
        let tracked = parents.iter().any(|p| p.node.tracked);
        Ok(Tensor {
            node: Rc::new(Node {
                id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
                shape,
                values,
                requires_grad: false,
                tracked,
                grad: RefCell::new(None),
                parents: if tracked { parents } else { Vec::new() },
                backward: if tracked { Some(backward) } else { None },
            }),
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.node.shape
    }

    pub fn numel(&self) -> usize {
        self.node.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.node.values
    }

    pub fn requires_grad(&self) -> bool {
        self.node.requires_grad
    }

    /// Accumulated gradient of a leaf after a backward pass.
    pub fn grad(&self) -> Option<Vec<f64>> {
        self.node.grad.borrow().clone()
    }

    pub fn zero_grad(&self) {
        *self.node.grad.borrow_mut() = None;
    }

    /// Constant copy detached from the graph.
    pub fn detach(&self) -> Tensor {
        Self::leaf(self.node.shape.clone(), self.node.values.clone(), false)
            .expect("detached values already validated")
    }

    /// Scalar value of a one-element tensor.
    pub fn item(&self) -> Result<f64> {
        if self.numel() != 1 {
            return Err(Error::shape(
                "item",
                format!("expected a scalar, got shape {:?}", self.shape()),
            ));
        }
        Ok(self.node.values[0])
    }
}

/// Reverse-mode sweep from a scalar loss.
///
/// Populates gradients on every trainable leaf reachable from `loss`.
/// Intermediate gradient buffers are dropped as soon as they have been
/// consumed, so the graph is releasable afterwards.
pub fn backward(loss: &Tensor) -> Result<()> {
    if loss.numel() != 1 {
        return Err(Error::shape(
            "backward",
            format!("loss must be scalar, got shape {:?}", loss.shape()),
        ));
    }
    if !loss.node.tracked {
        return Ok(()); // nothing trainable below
    }

    // Collect the reachable tracked subgraph; creation ids are a valid
    // topological order because every op node is younger than its parents.
    let mut nodes: Vec<Tensor> = Vec::new();
    let mut seen: HashSet<u64> = HashSet::new();
    let mut stack = vec![loss.clone()];
    while let Some(t) = stack.pop() {
        if !t.node.tracked || !seen.insert(t.node.id) {
            continue;
        }
        for p in &t.node.parents {
            stack.push(p.clone());
        }
        nodes.push(t);
    }
    nodes.sort_by(|a, b| b.node.id.cmp(&a.node.id));

    *loss.node.grad.borrow_mut() = Some(vec![1.0]);

    for tensor in &nodes {
        let node = &tensor.node;
        let grad = node.grad.borrow_mut().take();
        let Some(grad) = grad else { continue };
        if let Some(backward_fn) = &node.backward {
            for (idx, parent) in node.parents.iter().enumerate() {
                if !parent.node.tracked {
                    continue;
                }
                let mut slot = parent.node.grad.borrow_mut();
                let buffer =
                    slot.get_or_insert_with(|| vec![0.0; parent.node.values.len()]);
                backward_fn(idx, &grad, buffer);
            }
        }
        if node.requires_grad {
            // Leaves keep their gradient for the optimizer.
            *node.grad.borrow_mut() = Some(grad);
        }
    }
    Ok(())
}
