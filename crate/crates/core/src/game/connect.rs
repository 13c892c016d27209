//! Connect-n on a small grid: the built-in concrete game.
//!
//! Pieces drop into columns. A line of `connect` pieces (horizontal, vertical
//! or diagonal) wins; a full board with no line is a draw. Boards are stored
//! column-major as bitboards with one spare sentinel bit above each column,
//! so shifted line checks never wrap between columns.

use serde::{Deserialize, Serialize};

use super::{Action, Game, Player, Reward};
use crate::error::{invalid, Error, Result};

const CENTER_WEIGHT: f64 = 0.1;
const OPEN_LINE_WEIGHT: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConnectParams", into = "ConnectParams")]
pub struct ConnectGame {
    cols: u8,
    rows: u8,
    connect: u8,
    /// Every window of `connect` cells that could hold a line.
    windows: Vec<u64>,
    center: u64,
    full: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct ConnectParams {
    cols: u8,
    rows: u8,
    connect: u8,
}

impl TryFrom<ConnectParams> for ConnectGame {
    type Error = Error;

    fn try_from(p: ConnectParams) -> Result<Self> {
        ConnectGame::new(p.cols, p.rows, p.connect)
    }
}

impl From<ConnectGame> for ConnectParams {
    fn from(g: ConnectGame) -> Self {
        ConnectParams { cols: g.cols, rows: g.rows, connect: g.connect }
    }
}

impl Default for ConnectGame {
    /// 5 columns, 4 rows, three in a row wins.
    fn default() -> Self {
        ConnectGame::new(5, 4, 3).expect("default dimensions are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConnectState {
    /// Index 0 holds Max's pieces, index 1 Min's.
    pieces: [u64; 2],
    ply: u8,
    winner: Option<Player>,
}

impl ConnectState {
    pub fn ply(&self) -> u32 {
        self.ply as u32
    }

    pub fn winner(&self) -> Option<Player> {
        self.winner
    }

    pub fn pieces(&self, player: Player) -> u64 {
        self.pieces[slot(player)]
    }

    /// The same position with the two players' pieces exchanged.
    pub fn swapped(&self) -> ConnectState {
        ConnectState {
            pieces: [self.pieces[1], self.pieces[0]],
            ply: self.ply,
            winner: self.winner.map(Player::opponent),
        }
    }
}

fn slot(p: Player) -> usize {
    match p {
        Player::Max => 0,
        Player::Min => 1,
    }
}

impl ConnectGame {
    pub fn new(cols: u8, rows: u8, connect: u8) -> Result<Self> {
        if cols == 0 || rows == 0 {
            return Err(invalid("cols/rows", "board must be non-empty"));
        }
        if (cols as u32) * (rows as u32 + 1) > 64 {
            return Err(invalid("cols/rows", "board does not fit a 64-bit board"));
        }
        if connect < 2 || connect > cols.max(rows) {
            return Err(invalid("connect", format!("must be in 2..={}", cols.max(rows))));
        }
        let mut g = ConnectGame { cols, rows, connect, windows: Vec::new(), center: 0, full: 0 };
        for c in 0..cols {
            for r in 0..rows {
                g.full |= g.bit(c, r);
            }
        }
        let mid = [(cols - 1) / 2, cols / 2];
        for c in mid {
            for r in 0..rows {
                g.center |= g.bit(c, r);
            }
        }
        let n = connect as i32;
        for c in 0..cols as i32 {
            for r in 0..rows as i32 {
                for (dc, dr) in [(1, 0), (0, 1), (1, 1), (1, -1)] {
                    let (ec, er) = (c + dc * (n - 1), r + dr * (n - 1));
                    if ec < 0 || ec >= cols as i32 || er < 0 || er >= rows as i32 {
                        continue;
                    }
                    let w = (0..n).fold(0u64, |w, i| w | g.bit((c + dc * i) as u8, (r + dr * i) as u8));
                    g.windows.push(w);
                }
            }
        }
        Ok(g)
    }

    pub fn cols(&self) -> u8 {
        self.cols
    }

    pub fn rows(&self) -> u8 {
        self.rows
    }

    pub fn connect(&self) -> u8 {
        self.connect
    }

    /// Number of plies in a game that fills the board.
    pub fn max_plies(&self) -> u32 {
        self.cols as u32 * self.rows as u32
    }

    #[inline]
    fn bit(&self, col: u8, row: u8) -> u64 {
        1u64 << (col as u32 * (self.rows as u32 + 1) + row as u32)
    }

    #[inline]
    fn column_height(&self, mask: u64, col: u8) -> u8 {
        let h = self.rows as u32 + 1;
        ((mask >> (col as u32 * h)) & ((1u64 << self.rows) - 1)).count_ones() as u8
    }

    fn has_line(&self, b: u64) -> bool {
        let h = self.rows as u32 + 1;
        [1, h, h + 1, h - 1].into_iter().any(|s| {
            let mut m = b;
            for i in 1..self.connect as u32 {
                m &= b >> (i * s);
            }
            m != 0
        })
    }

    /// Plays a sequence of columns from the empty board.
    pub fn position(&self, cols: &[usize]) -> Result<ConnectState> {
        cols.iter().try_fold(self.root(), |s, &c| self.apply(&s, Action(c)))
    }

    /// Horizontal mirror image of a position.
    pub fn reflect(&self, state: &ConnectState) -> ConnectState {
        let mut out = *state;
        for p in 0..2 {
            let mut b = 0;
            for c in 0..self.cols {
                for r in 0..self.rows {
                    if state.pieces[p] & self.bit(c, r) != 0 {
                        b |= self.bit(self.cols - 1 - c, r);
                    }
                }
            }
            out.pieces[p] = b;
        }
        out
    }

    /// Owner of a cell, if occupied.
    pub fn cell(&self, state: &ConnectState, col: u8, row: u8) -> Option<Player> {
        let b = self.bit(col, row);
        if state.pieces[0] & b != 0 {
            Some(Player::Max)
        } else if state.pieces[1] & b != 0 {
            Some(Player::Min)
        } else {
            None
        }
    }

    /// Text diagram, top row first; `X` is Max, `O` is Min.
    pub fn render(&self, state: &ConnectState) -> String {
        let mut s = String::new();
        for r in (0..self.rows).rev() {
            for c in 0..self.cols {
                s.push(match self.cell(state, c, r) {
                    Some(Player::Max) => 'X',
                    Some(Player::Min) => 'O',
                    None => '.',
                });
            }
            s.push('\n');
        }
        s
    }

    fn open_lines(&self, own: u64, opp: u64) -> i32 {
        let need = self.connect as u32 - 1;
        self.windows
            .iter()
            .filter(|&&w| opp & w == 0 && (own & w).count_ones() == need)
            .count() as i32
    }
}

/// Feature heuristic for connect-n positions, positive favoring Max:
/// 0.1 per center-column piece plus 0.3 per open window holding all but one
/// piece of a line, each as a Max-minus-Min differential.
pub fn builtin_heuristic(game: &ConnectGame, state: &ConnectState) -> f64 {
    let [max, min] = state.pieces;
    let center = (max & game.center).count_ones() as i32 - (min & game.center).count_ones() as i32;
    let open = game.open_lines(max, min) - game.open_lines(min, max);
    CENTER_WEIGHT * center as f64 + OPEN_LINE_WEIGHT * open as f64
}

impl Game for ConnectGame {
    type State = ConnectState;

    fn root(&self) -> ConnectState {
        ConnectState { pieces: [0, 0], ply: 0, winner: None }
    }

    fn legal_actions_into(&self, state: &ConnectState, out: &mut Vec<Action>) {
        out.clear();
        if self.is_terminal(state) {
            return;
        }
        let mask = state.pieces[0] | state.pieces[1];
        out.extend((0..self.cols).filter(|&c| self.column_height(mask, c) < self.rows).map(|c| Action(c as usize)));
    }

    fn apply(&self, state: &ConnectState, action: Action) -> Result<ConnectState> {
        let illegal = Error::IllegalAction { action: action.0, ply: state.ply as u32 };
        if self.is_terminal(state) || action.0 >= self.cols as usize {
            return Err(illegal);
        }
        let col = action.0 as u8;
        let mask = state.pieces[0] | state.pieces[1];
        let height = self.column_height(mask, col);
        if height >= self.rows {
            return Err(illegal);
        }
        let mover = Player::at_ply(state.ply as u32);
        let mut next = *state;
        next.pieces[slot(mover)] |= self.bit(col, height);
        next.ply += 1;
        if self.has_line(next.pieces[slot(mover)]) {
            next.winner = Some(mover);
        }
        Ok(next)
    }

    fn is_terminal(&self, state: &ConnectState) -> bool {
        state.winner.is_some() || (state.pieces[0] | state.pieces[1]) == self.full
    }

    fn terminal_reward(&self, state: &ConnectState) -> Result<Reward> {
        if !self.is_terminal(state) {
            return Err(Error::NotTerminal);
        }
        Ok(state.winner.map_or(0.0, Player::sign))
    }

    fn to_move(&self, state: &ConnectState) -> Player {
        Player::at_ply(state.ply as u32)
    }

    fn ply(&self, state: &ConnectState) -> u32 {
        state.ply as u32
    }

    fn heuristic(&self, state: &ConnectState) -> Option<f64> {
        Some(builtin_heuristic(self, state))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::random_playout;
    use crate::rng::RngStream;

    #[test]
    fn empty_board_has_one_action_per_column() {
        let g = ConnectGame::default();
        let acts = g.legal_actions(&g.root());
        assert_eq!(acts, (0..5).map(Action).collect::<Vec<_>>());
    }

    #[test]
    fn full_column_is_illegal() {
        let g = ConnectGame::default();
        // Alternating drops into column 0 never make three in a row.
        let s = g.position(&[0, 0, 0, 0]).unwrap();
        assert_eq!(g.apply(&s, Action(0)), Err(Error::IllegalAction { action: 0, ply: 4 }));
        assert!(!g.legal_actions(&s).contains(&Action(0)));
        assert!(g.apply(&s, Action(9)).is_err());
    }

    #[test]
    fn horizontal_line_wins_for_max() {
        let g = ConnectGame::default();
        let s = g.position(&[0, 0, 1, 1, 2]).unwrap();
        assert!(g.is_terminal(&s));
        assert_eq!(g.terminal_reward(&s).unwrap(), 1.0);
        assert!(g.legal_actions(&s).is_empty());
    }

    #[test]
    fn vertical_and_diagonal_lines() {
        let g = ConnectGame::default();
        let v = g.position(&[4, 3, 4, 3, 0, 3]).unwrap();
        assert_eq!(v.winner(), Some(Player::Min));
        assert_eq!(g.terminal_reward(&v).unwrap(), -1.0);
        // X at (0,0), (1,1), (2,2).
        let d = g.position(&[0, 1, 1, 2, 2, 4, 2]).unwrap();
        assert_eq!(d.winner(), Some(Player::Max), "\n{}", g.render(&d));
    }

    #[test]
    fn no_wrap_between_columns() {
        let g = ConnectGame::default();
        // X at the top of column 0 and the bottom two of column 1 is not a vertical line.
        let s = g.position(&[1, 0, 0, 0, 1, 4, 0]).unwrap();
        assert_eq!(g.cell(&s, 0, 3), Some(Player::Max));
        assert!(s.winner().is_none(), "\n{}", g.render(&s));
    }

    #[test]
    fn draw_on_full_board_without_line() {
        // Connect-4 on 2x2 can never be completed.
        let g = ConnectGame::new(2, 2, 2).unwrap();
        let s = g.position(&[0, 1]).unwrap();
        assert!(!g.is_terminal(&s));
        let g = ConnectGame::new(4, 1, 4).unwrap();
        let s = g.position(&[0, 1, 2, 3]).unwrap();
        assert!(g.is_terminal(&s));
        assert_eq!(g.terminal_reward(&s).unwrap(), 0.0);
    }

    #[test]
    fn terminal_reward_requires_terminal() {
        let g = ConnectGame::default();
        assert_eq!(g.terminal_reward(&g.root()), Err(Error::NotTerminal));
    }

    #[test]
    fn heuristic_examples() {
        let g = ConnectGame::default();
        assert_eq!(builtin_heuristic(&g, &g.root()), 0.0);
        // X center, O edge: center diff 1, no open twos yet.
        let s = g.position(&[2, 0]).unwrap();
        assert!((builtin_heuristic(&g, &s) - 0.1).abs() < 1e-12);
        assert!((builtin_heuristic(&g, &s.swapped()) + 0.1).abs() < 1e-12);
    }

    #[test]
    fn games_end_within_board_size() {
        let g = ConnectGame::default();
        let mut rng = RngStream::new(3);
        for _ in 0..200 {
            let mut s = g.root();
            while !g.is_terminal(&s) {
                let acts = g.legal_actions(&s);
                s = g.apply(&s, acts[rng.index(acts.len())]).unwrap();
            }
            assert!(s.ply() <= g.max_plies());
        }
        let r = random_playout(&g, &g.root(), &mut rng);
        assert!([-1.0, 0.0, 1.0].contains(&r));
    }

    #[test]
    fn serde_roundtrip_rebuilds_tables() {
        let g = ConnectGame::new(6, 5, 4).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"cols":6,"rows":5,"connect":4}"#);
        let back: ConnectGame = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<ConnectGame>(r#"{"cols":9,"rows":9,"connect":4}"#).is_err());
    }
}
