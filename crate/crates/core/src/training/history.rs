use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainingHistory {
    /// Index into `epochs` of the minimum validation loss (earliest on ties).
    pub fn best_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, r) in self.epochs.iter().enumerate() {
            if best.is_none_or(|b| r.val_loss < self.epochs[b].val_loss) {
                best = Some(i);
            }
        }
        best
    }

    pub fn best(&self) -> Option<&EpochRecord> {
        self.best_index().map(|i| &self.epochs[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,train_acc,val_loss,val_acc\n");
        for r in &self.epochs {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6}",
                r.epoch, r.train_loss, r.train_acc, r.val_loss, r.val_acc
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> crate::Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut epochs = Vec::new();
        for row in reader.records() {
            let row = row?;
            let num = |i: usize| -> crate::Result<f64> {
                row.get(i)
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| crate::Error::Data(format!("bad history field {i}")))
            };
            epochs.push(EpochRecord {
                epoch: num(0)? as usize,
                train_loss: num(1)?,
                train_acc: num(2)?,
                val_loss: num(3)?,
                val_acc: num(4)?,
            });
        }
        Ok(Self { epochs })
    }
}
