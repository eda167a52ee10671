//! Per-epoch loss records shared by the autoencoder and RBM trainers.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub epoch: usize,
    pub train_loss: f64,
    /// Absent when training ran without a validation split.
    pub val_loss: Option<f64>,
}

/// Writes `epoch,train_loss,val_loss`, leaving `val_loss` empty when absent.
pub fn write_loss_csv<W: io::Write>(out: W, history: &[LossRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in history {
        w.serialize(r)?;
    }
    if history.is_empty() {
        w.write_record(["epoch", "train_loss", "val_loss"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_loss_csv(path: &Path, history: &[LossRecord]) -> csv::Result<()> {
    write_loss_csv(std::fs::File::create(path)?, history)
}

pub fn load_loss_csv(path: &Path) -> csv::Result<Vec<LossRecord>> {
    csv::Reader::from_path(path)?.deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_round_trip() {
        let h = vec![
            LossRecord {
                epoch: 1,
                train_loss: 0.5,
                val_loss: Some(0.25),
            },
            LossRecord {
                epoch: 2,
                train_loss: 0.125,
                val_loss: None,
            },
        ];
        let mut buf = Vec::new();
        write_loss_csv(&mut buf, &h).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "epoch,train_loss,val_loss\n1,0.5,0.25\n2,0.125,\n");
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("loss.csv");
        save_loss_csv(&p, &h).unwrap();
        assert_eq!(load_loss_csv(&p).unwrap(), h);
        let mut empty = Vec::new();
        write_loss_csv(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap(), "epoch,train_loss,val_loss\n");
    }
}
