//! Command-line interface.

pub fn cli_main<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let _ = args.into_iter();
    eprintln!("not yet wired");
    2
}
