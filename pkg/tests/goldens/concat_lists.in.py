pd.Series(df['A'].tolist() + df['B'].tolist())
