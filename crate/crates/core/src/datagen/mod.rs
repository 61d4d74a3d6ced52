//! Problem sources: seeded synthetic tensors, the tensor and edge-list file
//! formats, and the directed-graph pipeline that mixes third-order 3-cycle
//! statistics with a first-order random walk.

mod graph;
mod synthetic;
mod tensor_file;

pub use graph::{
    assemble_real_world, build_cycle_tensor, build_first_order, dangling_row, load_edgelist,
    parse_edgelist, random_digraph, CycleTensor, DirectedGraph, SparseMatrix, DEFAULT_GAMMA,
};
pub use synthetic::{gen_synthetic, normalize_columns, SYNTHETIC_GENERATOR};
pub use tensor_file::{load_tensor, parse_tensor, save_tensor, write_tensor, TENSOR_MAGIC};
