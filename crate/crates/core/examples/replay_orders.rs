// Parse an order file and replay it through the call auction and the
// continuous book.

use std::collections::BTreeMap;

use spectroscopy::matching::{replay_period, write_fills};
use spectroscopy::orderflow::{
    parse_order_events, DayPhases, Market, OrderSchema, ParseOptions, StockMeta, TradingCalendar,
};

const ORDERS: &str = "\
trader_id,class,stock,side,kind,price,size,cancel_target,timestamp,order_id
T1,ind,000001,buy,limit,10.00,500,,2003-03-03 09:20:00.00,1
T2,inst,000001,sell,limit,9.98,300,,2003-03-03 09:21:10.50,2
T3,ind,000001,sell,limit,10.02,400,,2003-03-03 09:45:00.00,3
T4,ind,000001,buy,market,,300,,2003-03-03 10:02:13.07,4
T9,ind,000001,buy,limit,10.00,100,,2003-03-03 12:00:00.00,7
T1,ind,000001,sell,limit,10.05,200,,2003-03-03 13:30:00.00,5
T5,inst,000001,buy,limit,10.06,200,,2003-03-03 14:10:00.00,6
";

fn main() -> spectroscopy::Result<()> {
    let parsed = parse_order_events(
        ORDERS.as_bytes(),
        &OrderSchema::default(),
        ParseOptions::default(),
    )?;
    let date = chrono::NaiveDate::from_ymd_opt(2003, 3, 3).unwrap();
    let cal = TradingCalendar::new([(date, DayPhases::default())])?;
    let metas = BTreeMap::from([(
        "000001".into(),
        StockMeta::new("000001", Market::A, "10.00".parse().unwrap()),
    )]);

    let out = replay_period(&parsed.events, &cal, &metas)?;
    print!("{}", write_fills(&out.fills));
    for d in &out.diagnostics {
        println!("note: {d}");
    }
    Ok(())
}
