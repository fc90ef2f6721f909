__cellrw_ser = df['title']
if isinstance(__cellrw_ser, pd.Series) and (not __cellrw_ser.isna().any()):
    matches = __cellrw_ser.str.contains('Star', regex=False)
else:
    matches = __cellrw_ser.apply(lambda x: 'Star' in x)
