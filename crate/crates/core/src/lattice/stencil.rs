/// Number of discrete velocities.
pub const Q: usize = 27;

/// Squared lattice speed of sound.
pub const CS2: f64 = 1.0 / 3.0;

/// Discrete velocities: rest, 6 faces, 12 edges, 8 corners. Each direction
/// and its opposite occupy an (odd, even) index pair.
pub const VELOCITIES: [[i32; 3]; Q] = [
    [0, 0, 0],
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
    [1, 1, 0],
    [-1, -1, 0],
    [1, -1, 0],
    [-1, 1, 0],
    [1, 0, 1],
    [-1, 0, -1],
    [1, 0, -1],
    [-1, 0, 1],
    [0, 1, 1],
    [0, -1, -1],
    [0, 1, -1],
    [0, -1, 1],
    [1, 1, 1],
    [-1, -1, -1],
    [1, 1, -1],
    [-1, -1, 1],
    [1, -1, 1],
    [-1, 1, -1],
    [-1, 1, 1],
    [1, -1, -1],
];

pub const VELOCITIES_F64: [[f64; 3]; Q] = {
    let mut out = [[0.0; 3]; Q];
    let mut i = 0;
    while i < Q {
        out[i] = [
            VELOCITIES[i][0] as f64,
            VELOCITIES[i][1] as f64,
            VELOCITIES[i][2] as f64,
        ];
        i += 1;
    }
    out
};

const W0: f64 = 8.0 / 27.0;
const W1: f64 = 2.0 / 27.0;
const W2: f64 = 1.0 / 54.0;
const W3: f64 = 1.0 / 216.0;

pub const WEIGHTS: [f64; Q] = [
    W0, W1, W1, W1, W1, W1, W1, W2, W2, W2, W2, W2, W2, W2, W2, W2, W2, W2, W2, W3, W3, W3, W3,
    W3, W3, W3, W3,
];

pub const OPPOSITE: [usize; Q] = {
    let mut out = [0; Q];
    let mut i = 1;
    while i < Q {
        out[i] = if i % 2 == 1 { i + 1 } else { i - 1 };
        i += 1;
    }
    out
};

/// Index of the direction with velocity `(cx, cy, cz)`.
pub const fn direction_index(cx: i32, cy: i32, cz: i32) -> usize {
    let mut i = 0;
    while i < Q {
        let c = VELOCITIES[i];
        if c[0] == cx && c[1] == cy && c[2] == cz {
            return i;
        }
        i += 1;
    }
    panic!("not a D3Q27 velocity")
}
