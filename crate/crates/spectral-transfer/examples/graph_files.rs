//! Read and write graphs as edge lists, Matrix Market files and OFF meshes.

use spectral_transfer::graph::grid;
use spectral_transfer::io::{emit_matrix_market, parse_edge_list_str, parse_matrix_market_str, parse_off_str, write_graph, parse_graph, GraphFormat};

fn main() -> spectral_transfer::Result<()> {
    let p3 = parse_edge_list_str("# a path\n0 1 1.0\n1 2 2.5\n", "inline")?;
    println!("edge list: {} vertices, edges {:?}", p3.n_vertices(), p3.edges());

    let k2 = parse_matrix_market_str("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 1.0\n", "inline")?;
    println!("Matrix Market: {} vertices, edges {:?}", k2.n_vertices(), k2.edges());

    let mesh = parse_off_str("OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n3 0 1 2\n3 1 3 2\n", "inline")?;
    println!("two-triangle mesh: {} vertices, {} unit edges", mesh.n_vertices(), mesh.n_edges());

    let g = grid(3, 3);
    let dir = std::env::temp_dir().join("spectral-transfer-graph-files");
    std::fs::create_dir_all(&dir).map_err(|e| spectral_transfer::Error::Config(e.to_string()))?;
    for (name, fmt) in [("grid.txt", GraphFormat::EdgeList), ("grid.mtx", GraphFormat::MatrixMarket)] {
        let path = dir.join(name);
        write_graph(&g, &path, fmt)?;
        let back = parse_graph(&path, fmt)?;
        println!("{}: round trip exact = {}", path.display(), back == g);
    }
    print!("\n{}", emit_matrix_market(&k2));
    Ok(())
}
