//! Predicted match rates and payoffs for all five treatments.
use lottery_disclosure::harness::{render_cells, Format};
use lottery_disclosure::info::Treatment;
use lottery_disclosure::stats::{prediction_cells, Mode};

fn main() -> lottery_disclosure::Result<()> {
    let mut cells = Vec::new();
    for t in Treatment::ALL {
        cells.extend(prediction_cells(t, Mode::Exact)?);
    }
    print!("{}", render_cells(&cells, Format::Csv));
    Ok(())
}
