__cellrw_co = df['A']
if isinstance(__cellrw_co, pd.Series) and __cellrw_co.dtype.kind in 'biufMm':
    __cellrw_res = __cellrw_co.nsmallest(n=5)
else:
    __cellrw_res = __cellrw_co.sort_values().head(n=5)
__cellrw_res
