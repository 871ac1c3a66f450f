//! Text file formats for instances.
//!
//! Graphs: a header line `n`, then one `i j s` line per pair with s = ±1;
//! pairs omitted from the file default to −1 (edge-list form). Tensors: a
//! header `order dim`, then one value per line in row-major order. XOR: a
//! header `n m`, then `i j k l s` lines. Indices are 0-based.

use super::{GraphInstance, SymTensor, TensorError, XorConstraint, XorInstance};

pub fn graph_to_text(g: &GraphInstance) -> String {
    let mut s = format!("{}\n", g.n);
    for i in 0..g.n {
        for j in (i + 1)..g.n {
            let sign = if g.has_edge(i, j) { 1 } else { -1 };
            s.push_str(&format!("{i} {j} {sign}\n"));
        }
    }
    s
}

pub fn graph_from_text(text: &str) -> Result<GraphInstance, TensorError> {
    let mut lines = numbered_lines(text);
    let (lineno, header) = lines.next().ok_or(TensorError::Parse { line: 0, msg: "empty file".into() })?;
    let n: usize = parse_field(header.trim(), lineno, "n")?;
    let mut y = vec![-1.0; GraphInstance::num_pairs(n)];
    for (lineno, line) in lines {
        let mut f = line.split_whitespace();
        let i: usize = parse_field(f.next().unwrap_or(""), lineno, "i")?;
        let j: usize = parse_field(f.next().unwrap_or(""), lineno, "j")?;
        let s: i32 = parse_field(f.next().unwrap_or("1"), lineno, "sign")?;
        if i >= n || j >= n || i == j {
            return Err(TensorError::Parse { line: lineno, msg: format!("bad pair ({i},{j}) for n={n}") });
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        y[GraphInstance::pair_index(n, a, b)] = if s >= 0 { 1.0 } else { -1.0 };
    }
    Ok(GraphInstance { n, y })
}

pub fn tensor_to_text(t: &SymTensor) -> String {
    let mut s = format!("{} {}\n", t.order(), t.dim());
    for v in t.values() {
        s.push_str(&format!("{v:.17e}\n"));
    }
    s
}

pub fn tensor_from_text(text: &str) -> Result<SymTensor, TensorError> {
    let mut lines = numbered_lines(text);
    let (lineno, header) = lines.next().ok_or(TensorError::Parse { line: 0, msg: "empty file".into() })?;
    let mut f = header.split_whitespace();
    let order: usize = parse_field(f.next().unwrap_or(""), lineno, "order")?;
    let dim: usize = parse_field(f.next().unwrap_or(""), lineno, "dim")?;
    let mut values = Vec::with_capacity(dim.pow(order as u32));
    for (lineno, line) in lines {
        values.push(parse_field(line.trim(), lineno, "value")?);
    }
    SymTensor::new_general(order, dim, values)
}

pub fn xor_to_text(x: &XorInstance) -> String {
    let mut s = format!("{} {}\n", x.n, x.constraints.len());
    for c in &x.constraints {
        let [a, b, cc, d] = c.vars;
        s.push_str(&format!("{a} {b} {cc} {d} {}\n", c.sign));
    }
    s
}

pub fn xor_from_text(text: &str) -> Result<XorInstance, TensorError> {
    let mut lines = numbered_lines(text);
    let (lineno, header) = lines.next().ok_or(TensorError::Parse { line: 0, msg: "empty file".into() })?;
    let mut f = header.split_whitespace();
    let n: usize = parse_field(f.next().unwrap_or(""), lineno, "n")?;
    let m: usize = parse_field(f.next().unwrap_or(""), lineno, "m")?;
    let mut constraints = Vec::with_capacity(m);
    for (lineno, line) in lines {
        let mut f = line.split_whitespace();
        let mut vars = [0usize; 4];
        for slot in vars.iter_mut() {
            *slot = parse_field(f.next().unwrap_or(""), lineno, "index")?;
        }
        let sign: i8 = parse_field(f.next().unwrap_or(""), lineno, "sign")?;
        if vars.windows(2).any(|w| w[0] >= w[1]) || vars[3] >= n {
            return Err(TensorError::Parse { line: lineno, msg: format!("indices {vars:?} not sorted distinct in 0..{n}") });
        }
        if sign != 1 && sign != -1 {
            return Err(TensorError::Parse { line: lineno, msg: format!("sign must be ±1, got {sign}") });
        }
        constraints.push(XorConstraint { vars, sign });
    }
    if constraints.len() != m {
        return Err(TensorError::Parse { line: 0, msg: format!("expected {m} constraints, found {}", constraints.len()) });
    }
    Ok(XorInstance { n, constraints })
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T, TensorError>
where
    T::Err: std::fmt::Display,
{
    s.parse()
        .map_err(|e| TensorError::Parse { line, msg: format!("bad {what} {s:?}: {e}") })
}
