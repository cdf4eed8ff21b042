//! Shared fixtures for the benchmark targets.

use chainpursuit::gen::generate_integer_signal;
use chainpursuit::{sketch_signal, IsolationMatrix, Mode, Sketch, SketchParams, SparseSignal};

pub struct Fixture {
    pub matrix: IsolationMatrix,
    pub signal: SparseSignal,
    pub sketch: Sketch,
}

pub fn fixture(d: usize, m: usize, mode: Mode) -> Fixture {
    let params = SketchParams::new(d, m).with_mode(mode).with_seed(0xbe9c);
    let matrix = IsolationMatrix::build(&params).expect("build matrix");
    let signal = generate_integer_signal(d, m, 0x51f7).expect("generate signal");
    let sketch = sketch_signal(&signal, &matrix).expect("sketch");
    Fixture {
        matrix,
        signal,
        sketch,
    }
}
