//! Built-in bitmap glyphs so text stimuli can be produced without external
//! font assets: a lowercase Latin face and a procedurally drawn symbol face
//! standing in for a pseudo-letter font.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Glyph, GlyphAtlas};
use crate::image::AlphaMask;
use crate::rng::Rng;

const ROWS: usize = 9;
const COLS: usize = 5;

/// 5×9 cells: rows 0-1 ascender, 2-6 x-height, 7-8 descender.
const LATIN: [(char, [&str; ROWS]); 26] = [
    ('a', [".....", ".....", ".###.", "....#", ".####", "#...#", ".####", ".....", "....."]),
    ('b', ["#....", "#....", "####.", "#...#", "#...#", "#...#", "####.", ".....", "....."]),
    ('c', [".....", ".....", ".###.", "#....", "#....", "#....", ".###.", ".....", "....."]),
    ('d', ["....#", "....#", ".####", "#...#", "#...#", "#...#", ".####", ".....", "....."]),
    ('e', [".....", ".....", ".###.", "#...#", "#####", "#....", ".###.", ".....", "....."]),
    ('f', ["..##.", ".#...", "###..", ".#...", ".#...", ".#...", ".#...", ".....", "....."]),
    ('g', [".....", ".....", ".####", "#...#", "#...#", "#...#", ".####", "....#", ".###."]),
    ('h', ["#....", "#....", "####.", "#...#", "#...#", "#...#", "#...#", ".....", "....."]),
    ('i', ["..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###.", ".....", "....."]),
    ('j', ["...#.", ".....", "..##.", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."]),
    ('k', ["#....", "#....", "#..#.", "#.#..", "##...", "#.#..", "#..#.", ".....", "....."]),
    ('l', [".##..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###.", ".....", "....."]),
    ('m', [".....", ".....", "##.#.", "#.#.#", "#.#.#", "#.#.#", "#.#.#", ".....", "....."]),
    ('n', [".....", ".....", "####.", "#...#", "#...#", "#...#", "#...#", ".....", "....."]),
    ('o', [".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###.", ".....", "....."]),
    ('p', [".....", ".....", "####.", "#...#", "#...#", "#...#", "####.", "#....", "#...."]),
    ('q', [".....", ".....", ".####", "#...#", "#...#", "#...#", ".####", "....#", "....#"]),
    ('r', [".....", ".....", "#.##.", "##..#", "#....", "#....", "#....", ".....", "....."]),
    ('s', [".....", ".....", ".####", "#....", ".###.", "....#", "####.", ".....", "....."]),
    ('t', [".#...", ".#...", "####.", ".#...", ".#...", ".#..#", "..##.", ".....", "....."]),
    ('u', [".....", ".....", "#...#", "#...#", "#...#", "#..##", ".##.#", ".....", "....."]),
    ('v', [".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#..", ".....", "....."]),
    ('w', [".....", ".....", "#...#", "#...#", "#.#.#", "#.#.#", ".#.#.", ".....", "....."]),
    ('x', [".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", ".....", "....."]),
    ('y', [".....", ".....", "#...#", "#...#", "#...#", "#...#", ".####", "....#", ".###."]),
    ('z', [".....", ".....", "#####", "...#.", "..#..", ".#...", "#####", ".....", "....."]),
];

type Grid = [[bool; COLS]; ROWS];

fn glyph_from_grid(grid: &Grid, scale: u32) -> Glyph {
    let mut mask = AlphaMask::new(COLS as u32 * scale, ROWS as u32 * scale);
    for (r, row) in grid.iter().enumerate() {
        for (c, &on) in row.iter().enumerate() {
            if !on {
                continue;
            }
            for dy in 0..scale {
                for dx in 0..scale {
                    mask.set(c as u32 * scale + dx, r as u32 * scale + dy, 255);
                }
            }
        }
    }
    Glyph {
        mask,
        advance: (COLS as i32 + 1) * scale as i32,
        bearing_x: 0,
        bearing_y: 0,
    }
}

fn parse(rows: &[&str; ROWS]) -> Grid {
    let mut g = [[false; COLS]; ROWS];
    for (r, row) in rows.iter().enumerate() {
        for (c, ch) in row.bytes().enumerate() {
            g[r][c] = ch == b'#';
        }
    }
    g
}

fn mirrored(g: &Grid) -> Grid {
    let mut m = *g;
    for row in m.iter_mut() {
        row.reverse();
    }
    m
}

/// Lowercase a-z, each font cell drawn as a `scale`×`scale` block.
pub fn latin(scale: u32) -> GlyphAtlas {
    let glyphs: BTreeMap<char, Glyph> = LATIN
        .iter()
        .map(|(ch, rows)| (*ch, glyph_from_grid(&parse(rows), scale)))
        .collect();
    GlyphAtlas {
        name: String::from("builtin-latin"),
        line_height: ROWS as u32 * scale,
        glyphs,
    }
}

fn connected(g: &Grid) -> bool {
    let cells: Vec<(usize, usize)> = (0..ROWS)
        .flat_map(|r| (0..COLS).map(move |c| (r, c)))
        .filter(|&(r, c)| g[r][c])
        .collect();
    let Some(&start) = cells.first() else {
        return false;
    };
    let mut seen = [[false; COLS]; ROWS];
    let mut stack = alloc::vec![start];
    seen[start.0][start.1] = true;
    let mut count = 0;
    while let Some((r, c)) = stack.pop() {
        count += 1;
        let nbrs = [
            (r.wrapping_sub(1), c),
            (r + 1, c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
        ];
        for (nr, nc) in nbrs {
            if nr < ROWS && nc < COLS && g[nr][nc] && !seen[nr][nc] {
                seen[nr][nc] = true;
                stack.push((nr, nc));
            }
        }
    }
    count == cells.len()
}

/// 26 procedurally drawn symbols mapped onto a-z. Every symbol is a single
/// connected stroke, not left-right symmetric, and neither equal to nor the
/// mirror image of any other symbol.
pub fn pseudo(scale: u32) -> GlyphAtlas {
    let mut rng = Rng::new(0x5053_4555_444f);
    let mut made: Vec<Grid> = Vec::new();
    while made.len() < 26 {
        let mut g = [[false; COLS]; ROWS];
        let (mut r, mut c) = (2 + rng.index(5), rng.index(COLS));
        g[r][c] = true;
        let steps = 9 + rng.index(6);
        for _ in 0..steps {
            match rng.index(4) {
                0 if r > 1 => r -= 1,
                1 if r < 7 => r += 1,
                2 if c > 0 => c -= 1,
                3 if c + 1 < COLS => c += 1,
                _ => {}
            }
            g[r][c] = true;
        }
        let ink = g.iter().flatten().filter(|&&b| b).count();
        let fresh = made.iter().all(|m| *m != g && *m != mirrored(&g));
        if ink >= 7 && mirrored(&g) != g && connected(&g) && fresh {
            made.push(g);
        }
    }
    let glyphs = made
        .iter()
        .enumerate()
        .map(|(i, g)| ((b'a' + i as u8) as char, glyph_from_grid(g, scale)))
        .collect();
    GlyphAtlas {
        name: String::from("builtin-pseudo"),
        line_height: ROWS as u32 * scale,
        glyphs,
    }
}
